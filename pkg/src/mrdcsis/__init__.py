"""Multivariate-rank distance-correlation feature screening."""

__version__ = "0.1.0"
