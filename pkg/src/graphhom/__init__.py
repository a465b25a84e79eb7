"""Exact homology of operad-decorated graph complexes and sheaf duality checks."""

__version__ = "0.1.0"
