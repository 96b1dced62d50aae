"""Symbolic verification toolkit for 5-dimensional para-CR structures ``z_y = G``, ``z_xxx = H``."""

from .evaluate import Point, Polynomial, evaluate
from .expr import Const, Expr, Fn, Var, diff, fn, substitute, symbols
from .identity import IdentityConfig, Status, ZeroVerdict, is_zero
from .parser import ParseError, parse
from .printer import to_string
from .simplify import simplify

__version__ = "0.1.0"

__all__ = [
    "Const",
    "Expr",
    "Fn",
    "IdentityConfig",
    "ParseError",
    "Point",
    "Polynomial",
    "Status",
    "Var",
    "ZeroVerdict",
    "diff",
    "evaluate",
    "fn",
    "is_zero",
    "parse",
    "simplify",
    "substitute",
    "symbols",
    "to_string",
]
