"""Invariant Brauer groups of complex tori and CM abelian varieties,
computed exactly from lattice data."""

__version__ = "0.1.0"
