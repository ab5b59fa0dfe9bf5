"""Abelian and Tauberian analysis of distributions via regularizing transforms."""

__version__ = "0.1.0"
