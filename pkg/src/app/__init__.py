"""Command-line application wiring: runtime bootstrap and the error boundary."""
