"""Free additive and multiplicative convolution of triangular-array rows,
boundary-curve density recovery and superconvergence experiments."""

__version__ = "0.1.0"
