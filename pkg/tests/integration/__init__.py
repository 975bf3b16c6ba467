"""Integration tests package.

This package contains the statistical and end-to-end suites that exercise
the engine, the applications and the command line together.
"""
