"""Command-line interface for checking criteria, solving and simulating runs."""
