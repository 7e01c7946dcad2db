"""Ab-initio Monte-Carlo statistics of 1D two-phase compressible flow."""

__version__ = "0.1.0"
