"""Batch analytics over social-post archives and daily price bars."""

__version__ = "0.1.0"
