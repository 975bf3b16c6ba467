"""Configuration management for the solver.

Loads, validates and saves the run, criterion, packing and batch settings
used by the command-line interface.
"""
