"""Exact-diagonalization toolkit for gradient-field Heisenberg chains under periodic driving."""

__version__ = "0.1.0"
