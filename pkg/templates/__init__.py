# This file makes the 'templates' directory a Python package.
