"""Probabilistic identity testing with witness-carrying verdicts.

An expression is first normalized with :func:`paracr.simplify.simplify`; if
that yields the literal zero the verdict is *structural*.  Otherwise it is
evaluated at random rational points (Schwartz-Zippel style), with every opaque
function replaced by a fresh random polynomial at each sample.  Sample ``i``
draws from its own generator seeded by ``(seed, i, attempt)``, so the verdict
depends only on the configuration and not on evaluation order.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterable

from .evaluate import Point, Polynomial, SingularPointError, evaluate
from .expr import Const, Expr, node_count
from .simplify import SingularExpressionError, simplify


class SamplingExhaustedError(RuntimeError):
    """Too many sample points were singular."""


class Status(str, enum.Enum):
    STRUCTURAL = "structurally_zero"
    PROBABILISTIC = "probabilistically_zero"
    NONZERO = "nonzero"


@dataclass(frozen=True)
class IdentityConfig:
    samples: int = 32
    seed: int = 0
    degree: int = 7
    bound: int = 10_000
    structural_limit: int = 4000

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")


DEFAULT = IdentityConfig()


@dataclass(frozen=True)
class ZeroVerdict:
    status: Status
    samples: int = 0
    seed: int | None = None
    witness: Point | None = None
    value: Fraction | None = None

    @property
    def zero(self) -> bool:
        return self.status is not Status.NONZERO

    def __bool__(self):
        raise TypeError("use verdict.zero instead of truth-testing a ZeroVerdict")

    def to_json(self) -> dict:
        out = {"status": self.status.value}
        if self.status is Status.PROBABILISTIC:
            out.update(samples=self.samples, seed=self.seed)
        if self.status is Status.NONZERO:
            out.update(witness=self.witness.to_json(), value=str(self.value))
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ZeroVerdict":
        status = Status(data["status"])
        if status is Status.NONZERO:
            return cls(status, witness=Point.from_json(data["witness"]), value=Fraction(data["value"]))
        return cls(status, data.get("samples", 0), data.get("seed"))


def _random_rational(rng: random.Random, bound: int) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def random_polynomial(rng: random.Random, arity: int, degree: int, bound: int) -> Polynomial:
    terms = {}
    for total in range(degree + 1):
        for combo in combinations_with_replacement(range(arity), total):
            exps = [0] * arity
            for i in combo:
                exps[i] += 1
            terms[tuple(exps)] = rng.randint(-bound, bound)
    # keep the top-degree part nonzero so derivatives up to ``degree`` are generic
    top = (degree,) + (0,) * (arity - 1)
    if terms.get(top, 0) == 0:
        terms[top] = 1
    return Polynomial.from_dict(arity, degree, terms)


def sample_point(e_vars: Iterable[str], fns: Iterable[tuple], rng: random.Random, cfg: IdentityConfig) -> Point:
    values = {v: _random_rational(rng, cfg.bound) for v in sorted(e_vars)}
    polys = {name: random_polynomial(rng, arity, cfg.degree, cfg.bound) for name, arity in sorted(fns)}
    return Point(values, polys)


def function_arities(e: Expr) -> dict:
    arities: dict = {}
    for name, arity in e.functions:
        if arities.setdefault(name, arity) != arity:
            raise ValueError(f"opaque function {name!r} used with several arities")
    return arities


def is_zero(e: Expr, cfg: IdentityConfig = DEFAULT, structural: bool = True) -> ZeroVerdict:
    """Decide whether ``e`` vanishes identically, returning a verdict with evidence."""
    if isinstance(e, Const):
        if e.value == 0:
            return ZeroVerdict(Status.STRUCTURAL)
        return ZeroVerdict(Status.NONZERO, witness=Point({}), value=e.value)
    if structural and node_count(e) <= cfg.structural_limit:
        try:
            if simplify(e) == Const(0):
                return ZeroVerdict(Status.STRUCTURAL)
        except SingularExpressionError:
            pass
    arities = function_arities(e)
    variables = e.free_vars
    budget = 100 * cfg.samples
    for i in range(cfg.samples):
        attempt = 0
        while True:
            rng = random.Random(f"{cfg.seed}:{i}:{attempt}")
            pt = sample_point(variables, arities.items(), rng, cfg)
            try:
                value = evaluate(e, pt)
                break
            except SingularPointError:
                attempt += 1
                budget -= 1
                if budget <= 0:
                    raise SamplingExhaustedError(
                        f"more than {100 * cfg.samples} singular sample points"
                    ) from None
        if value != 0:
            return ZeroVerdict(Status.NONZERO, witness=pt, value=value)
    return ZeroVerdict(Status.PROBABILISTIC, cfg.samples, cfg.seed)


def all_zero(exprs: Iterable[Expr], cfg: IdentityConfig = DEFAULT) -> ZeroVerdict:
    """Combined verdict: the first nonzero one, or zero if every expression vanishes."""
    statuses = []
    for e in exprs:
        v = is_zero(e, cfg)
        if not v.zero:
            return v
        statuses.append(v.status)
    if all(s is Status.STRUCTURAL for s in statuses):
        return ZeroVerdict(Status.STRUCTURAL)
    return ZeroVerdict(Status.PROBABILISTIC, cfg.samples, cfg.seed)


def with_seed(cfg: IdentityConfig, seed: int) -> IdentityConfig:
    return replace(cfg, seed=seed)
