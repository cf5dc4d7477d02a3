"""Offline figure rendering for the haloreach CSV outputs."""

from .rendering import render
from .schema import EmptyInputError, FigureSpec, SchemaError

__all__ = ["render", "FigureSpec", "SchemaError", "EmptyInputError"]
