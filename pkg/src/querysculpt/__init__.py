"""Exact query-complexity measures, query algorithms and promise constructions."""

__version__ = "0.1.0"
