"""Test fixtures package.

Sample input texts in every format the command line reads.
"""
