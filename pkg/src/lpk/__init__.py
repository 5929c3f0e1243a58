"""Exact birational invariants of simplicial toric log pairs."""

__version__ = "0.1.0"
