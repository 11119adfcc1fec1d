"""Dynamical quantum groups at generic level: Verma modules, intertwiners,
exchange matrices, elliptic R-matrices and bounded representations."""

__version__ = "0.1.0"
