"""Refinement checking for CSP by model shifting."""

__version__ = "0.1.0"
