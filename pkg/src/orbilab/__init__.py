"""Numerical companions for thick-thin geometry of hyperbolic 2- and 3-orbifolds."""

__version__ = "0.1.0"
