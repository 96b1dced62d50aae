"""Total derivatives on the jet coordinates (x, y, z, p, r) and admissibility checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .expr import Expr, add, as_expr, diff, mul
from .identity import DEFAULT, IdentityConfig, ZeroVerdict, is_zero
from .parser import parse

COORDS = ("x", "y", "z", "p", "r")


@dataclass(frozen=True, eq=False)
class PdeSystem:
    """The pair ``z_y = G(x, y, z, p)``, ``z_xxx = H(x, y, z, p, r)``.

    Iterated total derivatives of ``G`` are memoized on the instance.
    """

    G: Expr
    H: Expr
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "G", as_expr(self.G))
        object.__setattr__(self, "H", as_expr(self.H))

    @classmethod
    def parse(cls, G: str, H: str) -> "PdeSystem":
        return cls(parse(G), parse(H))

    def DG(self, order: int = 1) -> Expr:
        """``D^order G``."""
        if order == 0:
            return self.G
        hit = self._cache.get(order)
        if hit is None:
            hit = total_D(self.DG(order - 1), self)
            self._cache[order] = hit
        return hit

    @cached_property
    def G_r(self) -> Expr:
        return diff(self.G, "r")

    @cached_property
    def G_pp(self) -> Expr:
        return diff(diff(self.G, "p"), "p")


def total_D(e: Expr, sys: PdeSystem) -> Expr:
    """``D = d/dx + p d/dz + r d/dp + H d/dr``."""
    e = as_expr(e)
    return add(
        diff(e, "x"),
        mul("p", diff(e, "z")),
        mul("r", diff(e, "p")),
        mul(sys.H, diff(e, "r")),
    )


def total_Delta(e: Expr, sys: PdeSystem) -> Expr:
    """``Delta = d/dy + G d/dz + DG d/dp + D^2 G d/dr``."""
    e = as_expr(e)
    return add(
        diff(e, "y"),
        mul(sys.G, diff(e, "z")),
        mul(sys.DG(1), diff(e, "p")),
        mul(sys.DG(2), diff(e, "r")),
    )


def integrability_residual(sys: PdeSystem) -> Expr:
    """``Delta H - D^3 G``; vanishes exactly for completely integrable systems."""
    return add(total_Delta(sys.H, sys), mul(-1, sys.DG(3)))


@dataclass(frozen=True)
class AdmissibilityReport:
    levi_degenerate: ZeroVerdict
    two_nondegenerate: ZeroVerdict
    integrable: ZeroVerdict

    @property
    def in_class(self) -> bool:
        """Levi-degenerate (``G_r = 0``), 2-nondegenerate (``G_pp != 0``) and integrable."""
        return self.levi_degenerate.zero and not self.two_nondegenerate.zero and self.integrable.zero

    def to_json(self) -> dict:
        return {
            "levi_degenerate": self.levi_degenerate.to_json(),
            "two_nondegenerate": self.two_nondegenerate.to_json(),
            "integrable": self.integrable.to_json(),
            "in_class": self.in_class,
        }

    @classmethod
    def from_json(cls, data: dict) -> "AdmissibilityReport":
        return cls(
            ZeroVerdict.from_json(data["levi_degenerate"]),
            ZeroVerdict.from_json(data["two_nondegenerate"]),
            ZeroVerdict.from_json(data["integrable"]),
        )


def check_admissible(sys: PdeSystem, cfg: IdentityConfig = DEFAULT) -> AdmissibilityReport:
    return AdmissibilityReport(
        levi_degenerate=is_zero(sys.G_r, cfg),
        two_nondegenerate=is_zero(sys.G_pp, cfg),
        integrable=is_zero(integrability_residual(sys), cfg),
    )
