"""Gelfand pairs on the Heisenberg group."""

__version__ = "0.1.0"
