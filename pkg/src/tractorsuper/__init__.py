"""Exact workbench for tractor conformal superalgebras.

Builds Clifford representations, spinor modules and tractor forms over
Q(i), computes holonomy-invariant spinors and forms, assembles the graded
bracket tables, and checks the graded Jacobi identities exactly.
"""
from .exactla import KERNEL_BACKEND, GaussianRational, Mat

__version__ = "0.1.0"

__all__ = ["GaussianRational", "Mat", "KERNEL_BACKEND", "__version__"]
