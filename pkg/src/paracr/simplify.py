"""Rational-function normal form for expressions.

Coordinates and opaque-function applications are treated as independent
indeterminates; the expression is rebuilt as ``numerator / denominator`` with
both sides expanded and their polynomial gcd cancelled.  The arithmetic is
delegated to sympy's sparse fraction fields over QQ.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import sympy
from sympy.polys.domains import QQ
from sympy.polys.fields import field

from .expr import (
    ONE,
    ZERO,
    Add,
    Const,
    Div,
    Expr,
    Fn,
    Mul,
    Pow,
    Var,
    add,
    div,
    mul,
    power,
)
from .printer import to_string


class SingularExpressionError(ZeroDivisionError):
    """The expression divides by something that is identically zero."""


def _atoms(e: Expr, out: dict, memo: set):
    if id(e) in memo:
        return
    memo.add(id(e))
    if isinstance(e, (Var, Fn)):
        out.setdefault(e, None)
        return
    for c in e.children:
        _atoms(c, out, memo)


@lru_cache(maxsize=256)
def _field(n: int):
    syms = sympy.symbols(f"a0:{n}") if n else ()
    if n == 0:
        syms = (sympy.Symbol("a0"),)
    K, *gens = field(syms, QQ)
    return K, gens


class RationalContext:
    """Maps a family of expressions into one fraction field and back."""

    def __init__(self, exprs):
        exprs = [self._prepare(e) for e in exprs]
        found: dict = {}
        memo: set = set()
        for e in exprs:
            _atoms(e, found, memo)
        self.atoms = sorted(found, key=lambda a: (to_string(a), len(to_string(a))))
        self.K, gens = _field(len(self.atoms))
        self.gen_of = {a: g for a, g in zip(self.atoms, gens)}
        self.prepared = exprs

    @staticmethod
    def _prepare(e: Expr) -> Expr:
        # function arguments are normalized first so that equal atoms compare equal
        from .expr import replace_functions

        if not e.functions:
            return e
        return replace_functions(
            e, lambda f: Fn(f.name, tuple(simplify(a) for a in f.args), f.orders)
        )

    def to_field(self, e: Expr, memo: dict | None = None):
        memo = {} if memo is None else memo
        K = self.K

        def go(node):
            hit = memo.get(id(node))
            if hit is not None:
                return hit
            if isinstance(node, Const):
                out = K(QQ(node.value.numerator, node.value.denominator))
            elif isinstance(node, (Var, Fn)):
                out = self.gen_of[node]
            elif isinstance(node, Add):
                out = K.zero
                for t in node.terms:
                    out = out + go(t)
            elif isinstance(node, Mul):
                out = K.one
                for f in node.factors:
                    out = out * go(f)
            elif isinstance(node, Pow):
                b = go(node.base)
                if node.exp < 0 and b == K.zero:
                    raise SingularExpressionError(f"negative power of zero in {to_string(node)}")
                out = b ** node.exp
            elif isinstance(node, Div):
                d = go(node.den)
                if d == K.zero:
                    raise SingularExpressionError(f"identically zero denominator {to_string(node.den)}")
                out = go(node.num) / d
            else:
                raise TypeError(type(node).__name__)
            memo[id(node)] = out
            return out

        return go(e)

    def poly_to_expr(self, poly) -> Expr:
        terms = []
        for monom, coeff in poly.terms():
            c = Fraction(int(coeff.numerator), int(coeff.denominator))
            factors = [Const(c)]
            for atom, k in zip(self.atoms, monom):
                if k:
                    factors.append(power(atom, k))
            terms.append(mul(*factors))
        return add(*terms) if terms else ZERO

    def from_field(self, elem) -> Expr:
        num, den = elem.numer, elem.denom
        # make the denominator's leading coefficient 1 for a stable normal form
        if not den.is_ground:
            lc = den.LC
            num, den = num.quo_ground(lc), den.quo_ground(lc)
        else:
            c = den.LC
            num, den = num.quo_ground(c), den.quo_ground(c)
        n_expr = self.poly_to_expr(num)
        if den.is_ground:
            return n_expr
        return div(n_expr, self.poly_to_expr(den))


def simplify(e: Expr) -> Expr:
    """Return the expanded, gcd-cancelled ``numerator/denominator`` form of ``e``."""
    if isinstance(e, (Const, Var)):
        return e
    ctx = RationalContext([e])
    return ctx.from_field(ctx.to_field(ctx.prepared[0]))


def simplify_many(exprs) -> list[Expr]:
    exprs = list(exprs)
    if not exprs:
        return []
    ctx = RationalContext(exprs)
    memo: dict = {}
    return [ctx.from_field(ctx.to_field(e, memo)) for e in ctx.prepared]


def is_structurally_zero(e: Expr) -> bool:
    return simplify(e) == ZERO


def solve_matrix_inverse(rows):
    """Exact symbolic inverse of a square matrix of expressions (Gauss-Jordan in the fraction field)."""
    n = len(rows)
    flat = [x for r in rows for x in r]
    ctx = RationalContext(flat)
    memo: dict = {}
    K = ctx.K
    m = [[ctx.to_field(ctx.prepared[i * n + j], memo) for j in range(n)] for i in range(n)]
    inv = [[K.one if i == j else K.zero for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != K.zero), None)
        if piv is None:
            raise SingularExpressionError("matrix is singular as a rational-function matrix")
        m[col], m[piv] = m[piv], m[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        inv[col] = [x / p for x in inv[col]]
        for r in range(n):
            if r != col and m[r][col] != K.zero:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
                inv[r] = [a - f * b for a, b in zip(inv[r], inv[col])]
    return [[ctx.from_field(x) for x in row] for row in inv]


def determinant(rows) -> Expr:
    """Exact determinant by fraction-field Gaussian elimination."""
    n = len(rows)
    flat = [x for r in rows for x in r]
    ctx = RationalContext(flat)
    memo: dict = {}
    K = ctx.K
    m = [[ctx.to_field(ctx.prepared[i * n + j], memo) for j in range(n)] for i in range(n)]
    det = K.one
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != K.zero), None)
        if piv is None:
            return ZERO
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        p = m[col][col]
        det = det * p
        for r in range(col + 1, n):
            if m[r][col] != K.zero:
                f = m[r][col] / p
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
    return ctx.from_field(det)


__all__ = [
    "RationalContext",
    "SingularExpressionError",
    "determinant",
    "is_structurally_zero",
    "simplify",
    "simplify_many",
    "solve_matrix_inverse",
    "ONE",
]
