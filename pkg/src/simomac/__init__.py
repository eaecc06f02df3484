"""Numerical laboratory for the DoF region of the two-user non-coherent
SIMO multiple-access channel in block fading."""

__version__ = "0.1.0"
