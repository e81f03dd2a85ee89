"""Deterministic simulator of a Bangla-digit LCD clock."""

__version__ = "0.1.0"
