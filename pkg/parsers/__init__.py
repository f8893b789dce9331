# This file makes the 'parsers' directory a Python package.
