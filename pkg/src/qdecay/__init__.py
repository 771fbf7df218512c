"""Density-matrix simulation of noisy quantum gates and circuits."""

__version__ = "0.1.0"
