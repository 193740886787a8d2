"""Exact-arithmetic kernel for supersingular height-2 formal group computations."""

__version__ = "0.1.0"
