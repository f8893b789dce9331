# This file makes the 'generators' directory a Python package.
