"""Monge's conic elimination and a data-driven conic fit.

A graph ``G = G(p)`` lies on the conic
``a1 G^2 + 2 a2 p G + a3 p^2 + a4 G + a5 p + a6 = 0`` only if the six
derivatives ``d^k/dp^k`` (k = 0..5) of the conic form vanish simultaneously,
i.e. only if the 6x6 coefficient matrix below is singular.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .expr import Expr, as_expr, diff, mul, power
from .simplify import determinant

CONIC_MONOMIALS = ("G^2", "2*p*G", "p^2", "G", "p", "1")


class RankDeficientError(ValueError):
    """The samples do not determine a unique conic."""


def conic_derivative_matrix(G, var: str = "p") -> list[list[Expr]]:
    """Row ``k`` holds the k-th ``var``-derivative of ``[G^2, 2pG, p^2, G, p, 1]``."""
    G = as_expr(G)
    p = as_expr(var)
    row = [power(G, 2), mul(2, p, G), power(p, 2), G, p, as_expr(1)]
    rows = [row]
    for _ in range(5):
        row = [diff(e, var) for e in row]
        rows.append(row)
    return rows


def elimination_determinant(G, var: str = "p") -> Expr:
    """Determinant of :func:`conic_derivative_matrix`, in rational normal form."""
    return determinant(conic_derivative_matrix(G, var))


@dataclass(frozen=True)
class ConicFit:
    coeffs: tuple
    residual: float | Fraction
    exact: bool

    def to_json(self) -> dict:
        fmt = str if self.exact else float
        return {
            "coeffs": [fmt(c) for c in self.coeffs],
            "residual": fmt(self.residual),
            "exact": self.exact,
            "monomials": list(CONIC_MONOMIALS),
        }


def _design_row(p, g):
    return [g * g, 2 * p * g, p * p, g, p, 1]


def _normalize_max(vec):
    big = max(vec, key=abs)
    return tuple(c / big for c in vec)


def _rational_nullspace(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    """Nullspace basis by Gauss-Jordan elimination over the rationals."""
    m = [list(r) for r in rows]
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for row, pc in zip(m, pivots):
            v[pc] = -row[fc]
        basis.append(v)
    return basis


def conic_fit(samples: Sequence[tuple], rel_tol: float = 1e-10) -> ConicFit:
    """Fit the conic minimizing the sum of squared conic forms over unit-norm coefficients.

    Rational samples are handled exactly: if the design matrix has a
    one-dimensional nullspace the fit is exact with zero residual.  Otherwise
    the smallest right-singular vector of the floating design matrix is used.
    """
    if len(samples) < 6:
        raise ValueError("at least six samples are needed")
    if len({s[0] for s in samples}) < 6:
        raise ValueError("at least six distinct p values are needed")
    exact = all(isinstance(v, (int, Fraction)) for s in samples for v in s)
    if exact:
        rows = [_design_row(Fraction(p), Fraction(g)) for p, g in samples]
        null = _rational_nullspace(rows)
        if len(null) > 1:
            raise RankDeficientError(f"nullspace of dimension {len(null)}: conic is not unique")
        if len(null) == 1:
            return ConicFit(_normalize_max(null[0]), Fraction(0), True)
    A = np.array([_design_row(float(p), float(g)) for p, g in samples], dtype=float)
    _, s, vt = np.linalg.svd(A, full_matrices=False)
    if s[-2] <= rel_tol * s[0]:
        raise RankDeficientError("design matrix has more than one vanishing singular value")
    v = vt[-1]
    residual = float(np.sqrt(np.mean((A @ v) ** 2)))
    return ConicFit(_normalize_max(tuple(float(c) for c in v)), residual, False)


def read_samples(text: str) -> list[tuple]:
    """Parse ``p,G`` lines; ``#`` starts a comment.  Exact rationals are kept as Fractions."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [x.strip() for x in line.split(",")]
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'p,G'")
        vals = []
        for x in parts:
            try:
                vals.append(Fraction(x))
            except ValueError:
                try:
                    vals.append(float(x))
                except ValueError:
                    raise ValueError(f"line {lineno}: cannot read {x!r}") from None
        out.append(tuple(vals))
    return out
