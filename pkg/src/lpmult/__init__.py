"""Numerical probes for analytic l^p multipliers on the disk."""

__version__ = "0.1.0"
