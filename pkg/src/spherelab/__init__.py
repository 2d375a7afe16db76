"""Numerical laboratory for uncentred spherical, lacunary and Nikodym maximal
operators (linear and bilinear) and the sets they are indexed by."""

__version__ = "0.1.0"
