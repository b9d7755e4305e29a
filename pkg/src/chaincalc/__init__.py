"""Differential chains and their dual forms."""

__version__ = "0.1.0"
