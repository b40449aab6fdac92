"""Exact gluing of locally free sheaves on toric degenerations from tropical multi-section data."""

__version__ = "0.1.0"
