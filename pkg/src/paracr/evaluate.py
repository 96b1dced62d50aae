"""Exact evaluation of expressions at rational points."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Mapping

from .expr import Add, Const, Div, Expr, Fn, Mul, Pow, Var


class EvaluationError(ValueError):
    pass


class UnboundSymbolError(EvaluationError):
    pass


class SingularPointError(EvaluationError, ZeroDivisionError):
    """A denominator vanished at the sample point; the caller should resample."""


@dataclass(frozen=True)
class Polynomial:
    """Concrete polynomial used to instantiate an opaque function.

    ``terms`` maps exponent tuples (one entry per argument) to coefficients.
    """

    arity: int
    degree: int
    terms: tuple = ()

    @classmethod
    def from_dict(cls, arity: int, degree: int, terms: Mapping[tuple, Fraction]):
        items = tuple(sorted((tuple(k), Fraction(v)) for k, v in terms.items() if v != 0))
        return cls(arity, degree, items)

    def derivative(self, orders: tuple) -> "Polynomial":
        return _poly_derivative(self, tuple(orders))

    def __call__(self, values) -> Fraction:
        total = Fraction(0)
        for exps, c in self.terms:
            t = c
            for v, k in zip(values, exps):
                if k:
                    t *= v ** k
            total += t
        return total

    def to_json(self) -> dict:
        return {
            "arity": self.arity,
            "degree": self.degree,
            "terms": [[list(k), str(c)] for k, c in self.terms],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Polynomial":
        return cls(
            data["arity"],
            data["degree"],
            tuple((tuple(k), Fraction(c)) for k, c in data["terms"]),
        )


@lru_cache(maxsize=4096)
def _poly_derivative(poly: Polynomial, orders: tuple) -> Polynomial:
    out = {}
    for exps, c in poly.terms:
        coeff = c
        new = []
        for e, k in zip(exps, orders):
            if k > e:
                coeff = 0
                break
            coeff *= factorial(e) // factorial(e - k)
            new.append(e - k)
        if coeff:
            key = tuple(new)
            out[key] = out.get(key, 0) + coeff
    return Polynomial.from_dict(poly.arity, max(poly.degree - sum(orders), 0), out)


@dataclass(frozen=True)
class Point:
    """Exact coordinate values plus polynomial instantiations of opaque functions."""

    values: Mapping[str, Fraction]
    functions: Mapping[str, Polynomial] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "values": {k: str(v) for k, v in sorted(self.values.items())},
            "functions": {k: p.to_json() for k, p in sorted(self.functions.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "Point":
        return cls(
            {k: Fraction(v) for k, v in data["values"].items()},
            {k: Polynomial.from_json(p) for k, p in data.get("functions", {}).items()},
        )


def evaluate(e: Expr, pt: Point | Mapping[str, Fraction]) -> Fraction:
    """Evaluate ``e`` exactly at ``pt``.

    Raises :class:`UnboundSymbolError` for missing coordinates or functions and
    :class:`SingularPointError` when a denominator vanishes.
    """
    if not isinstance(pt, Point):
        pt = Point({k: Fraction(v) for k, v in pt.items()})
    values, fns = pt.values, pt.functions
    memo: dict[int, Fraction] = {}

    def go(node: Expr) -> Fraction:
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        if isinstance(node, Const):
            out = node.value
        elif isinstance(node, Var):
            try:
                out = Fraction(values[node.name])
            except KeyError:
                raise UnboundSymbolError(f"coordinate {node.name!r} is not bound") from None
        elif isinstance(node, Fn):
            poly = fns.get(node.name)
            if poly is None:
                raise UnboundSymbolError(f"opaque function {node.name!r} is not instantiated")
            if poly.arity != len(node.args):
                raise EvaluationError(f"{node.name} instantiated with arity {poly.arity}")
            out = poly.derivative(node.orders)([go(a) for a in node.args])
        elif isinstance(node, Add):
            out = sum((go(t) for t in node.terms), Fraction(0))
        elif isinstance(node, Mul):
            out = Fraction(1)
            for f in node.factors:
                out *= go(f)
                if out == 0:
                    # later factors must still be defined at the point
                    for g in node.factors:
                        go(g)
                    break
        elif isinstance(node, Pow):
            b = go(node.base)
            if b == 0 and node.exp < 0:
                raise SingularPointError("negative power of zero")
            out = b ** node.exp
        elif isinstance(node, Div):
            d = go(node.den)
            if d == 0:
                raise SingularPointError("denominator vanishes")
            out = go(node.num) / d
        else:
            raise TypeError(f"unknown node {type(node).__name__}")
        memo[id(node)] = out
        return out

    return go(e)

