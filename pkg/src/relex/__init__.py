"""Finite box-space Cayley graphs and numerical certificates for their expansion properties."""

__version__ = "0.1.0"
