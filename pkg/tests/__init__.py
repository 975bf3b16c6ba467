"""Test package for lopsided-mt.

This package contains unit tests, integration tests, and test fixtures
for the resampling engine, the applications and the command line.
"""
