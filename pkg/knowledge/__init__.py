# This file makes the 'knowledge' directory a Python package.
