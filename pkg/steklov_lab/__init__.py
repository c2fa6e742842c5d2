"""Boundary-integral spectral laboratory for the biharmonic Steklov operators."""

from . import geometry, kernels, layer, nodal, oracle_disk, steklov, verify

__version__ = "0.1.0"
