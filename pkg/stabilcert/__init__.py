"""Stability certificates for convolution-dominated infinite matrices."""

__version__ = "1.0.0"
