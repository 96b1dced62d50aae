"""Relative differential invariants of the PDE pair and the classification they induce.

``W`` is the Wuenschmann expression, ``M`` the Monge expression, ``N`` the
mixed invariant and ``Z`` the Chern invariant.  ``B = M / (2 G_pp^3)`` and
``C = N / G_pp`` are kept as quotients; verdicts are always taken on the
numerators ``M`` and ``N``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import Expr, add, as_expr, diff, diff_n, div, mul, power
from .identity import DEFAULT, IdentityConfig, ZeroVerdict, is_zero
from .jet import AdmissibilityReport, PdeSystem, check_admissible, total_D
from .printer import to_string


class InadmissibleSystemError(ValueError):
    def __init__(self, report: "InvariantReport"):
        self.report = report
        super().__init__("system is not in the class G_r = 0, G_pp != 0, Delta H = D^3 G")


def wunschmann(sys: PdeSystem) -> Expr:
    """``9 D^2 H_r - 27 D H_p - 18 H_r D H_r + 18 H_p H_r + 4 H_r^3 + 54 H_z``.

    ``D^2 H_r`` means ``D(D(H_r))``: the partial is taken first.
    """
    H = sys.H
    H_r, H_p, H_z = diff(H, "r"), diff(H, "p"), diff(H, "z")
    DH_r = total_D(H_r, sys)
    return add(
        mul(9, total_D(DH_r, sys)),
        mul(-27, total_D(H_p, sys)),
        mul(-18, H_r, DH_r),
        mul(18, H_p, H_r),
        mul(4, power(H_r, 3)),
        mul(54, H_z),
    )


def monge(G, var: str = "p") -> Expr:
    """``40 G_ppp^3 - 45 G_pp G_ppp G_pppp + 9 G_pp^2 G_ppppp``."""
    G = as_expr(G)
    g2 = diff_n(G, var, var)
    g3 = diff(g2, var)
    g4 = diff(g3, var)
    g5 = diff(g4, var)
    return add(
        mul(40, power(g3, 3)),
        mul(-45, g2, g3, g4),
        mul(9, power(g2, 2), g5),
    )


def mixed_N(sys: PdeSystem) -> Expr:
    """``2 G_ppp + G_pp H_rr``."""
    G_pp = sys.G_pp
    return add(mul(2, diff(G_pp, "p")), mul(G_pp, diff_n(sys.H, "r", "r")))


def chern(H) -> Expr:
    """``H_rrrr``."""
    return diff_n(as_expr(H), "r", "r", "r", "r")


def monge_B(G) -> Expr:
    G = as_expr(G)
    return div(monge(G), mul(2, power(diff_n(G, "p", "p"), 3)))


def mixed_C(sys: PdeSystem) -> Expr:
    return div(mixed_N(sys), sys.G_pp)


@dataclass(frozen=True)
class Invariant:
    expr: Expr
    verdict: ZeroVerdict

    def to_json(self) -> dict:
        return {"expr": to_string(self.expr), "verdict": self.verdict.to_json()}


@dataclass(frozen=True)
class InvariantReport:
    admissibility: AdmissibilityReport
    W: Invariant
    M: Invariant
    N: Invariant
    Z: Invariant
    B: Expr | None
    C: Expr | None

    @property
    def flat(self) -> bool:
        return self.W.verdict.zero and self.M.verdict.zero and self.N.verdict.zero

    @property
    def contact_projective_pair(self) -> bool:
        return self.N.verdict.zero

    def to_json(self) -> dict:
        return {
            "admissibility": self.admissibility.to_json(),
            "W": self.W.to_json(),
            "M": self.M.to_json(),
            "N": self.N.to_json(),
            "Z": self.Z.to_json(),
            "B": None if self.B is None else to_string(self.B),
            "C": None if self.C is None else to_string(self.C),
            "flags": {
                "flat": self.flat,
                "contact_projective_pair": self.contact_projective_pair,
            },
        }


def classify(sys: PdeSystem, cfg: IdentityConfig = DEFAULT, require_admissible: bool = True) -> InvariantReport:
    """Compute every invariant with its verdict.

    With ``require_admissible`` an out-of-class system raises
    :class:`InadmissibleSystemError` carrying the full report.
    """
    from .simplify import simplify

    adm = check_admissible(sys, cfg)

    def inv(e: Expr) -> Invariant:
        v = is_zero(e, cfg)
        shown = e
        try:
            shown = simplify(e)
        except ZeroDivisionError:
            pass
        return Invariant(shown, v)

    G_pp_nonzero = not adm.two_nondegenerate.zero
    report = InvariantReport(
        admissibility=adm,
        W=inv(wunschmann(sys)),
        M=inv(monge(sys.G)),
        N=inv(mixed_N(sys)),
        Z=inv(chern(sys.H)),
        B=monge_B(sys.G) if G_pp_nonzero else None,
        C=mixed_C(sys) if G_pp_nonzero else None,
    )
    if require_admissible and not adm.in_class:
        raise InadmissibleSystemError(report)
    return report


def invariant_from_json(data: dict) -> Invariant:
    from .parser import parse

    return Invariant(parse(data["expr"]), ZeroVerdict.from_json(data["verdict"]))


def report_from_json(data: dict) -> InvariantReport:
    from .parser import parse

    return InvariantReport(
        admissibility=AdmissibilityReport.from_json(data["admissibility"]),
        W=invariant_from_json(data["W"]),
        M=invariant_from_json(data["M"]),
        N=invariant_from_json(data["N"]),
        Z=invariant_from_json(data["Z"]),
        B=None if data["B"] is None else parse(data["B"]),
        C=None if data["C"] is None else parse(data["C"]),
    )
