"""Truncated and maximal Riesz transforms: multipliers, kernels and grid operators."""

__version__ = "0.1.0"
