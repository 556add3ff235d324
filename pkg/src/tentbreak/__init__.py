"""Chaotic tent-map block cipher, its differential attacks, and diagnostics."""

__version__ = "0.1.0"
