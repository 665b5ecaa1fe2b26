"""Diophantine approximation tools and the channel models they govern."""

__version__ = "0.1.0"
