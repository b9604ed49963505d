"""Exact-arithmetic toolkit for modular degrees, congruence numbers and
Manin-constant certification of elliptic optimal quotients."""

__version__ = "0.1.0"
