"""Utility helpers.

Error reporting, batch fan-out over worker threads, and wall-time and memory
measurement shared by the engine and the command-line interface.
"""
