"""Exhaustive search and verification tools for partially directed k-uniform hypergraphs."""

__version__ = "0.1.0"
