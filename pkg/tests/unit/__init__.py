"""Unit tests package.

This package contains unit tests for individual modules of the engine,
the applications, the configuration layer and the command line.
"""
