"""Exact computations for quotient spaces of almost normal Z^n subgroups."""

__version__ = "0.1.0"
