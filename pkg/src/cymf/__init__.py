"""Exact arithmetic for graded matrix factorizations and CY3 Hodge bookkeeping."""

__version__ = "0.1.0"
