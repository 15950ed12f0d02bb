"""Evolutionary discovery of differential equations from gridded field data."""

from .grid import ConfigurationError, Field, FieldFormatError, Grid, build_uniform_grid
from .representation import Equation, Term, TokenPool, canonical_form, parse_pool

__all__ = [
    "ConfigurationError", "Field", "FieldFormatError", "Grid", "build_uniform_grid",
    "Equation", "Term", "TokenPool", "canonical_form", "parse_pool",
]
__version__ = "0.1.0"
