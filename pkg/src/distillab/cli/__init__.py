"""Command-line interface for the lab."""

from .main import main

__all__ = ["main"]
