"""Numerical kernel for landslides, K-surfaces and harmonic maps on hyperbolic cone surfaces."""

from . import errors, tensor

__version__ = "0.1.0"

__all__ = ["errors", "tensor", "__version__"]
