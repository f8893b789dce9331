# This file makes the 'validators' directory a Python package.
