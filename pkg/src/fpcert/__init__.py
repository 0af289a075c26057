"""Certified roundoff error bounds for polynomial and rational programs."""

__version__ = "0.1.0"
