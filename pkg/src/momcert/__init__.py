"""Rigorous volume bounds for hyperbolic 3-manifolds with a cusp."""

__version__ = "0.1.0"
