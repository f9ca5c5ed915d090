"""Executable combined linear/non-linear lambda calculus with string diagrams."""

__version__ = "0.1.0"
