"""Formal exterior differential systems over abstract 1-form generators.

Forms are sparse maps from monomials (tuples of atom names) to polynomials in
the named scalar coefficients.  Atoms are the declared generators (degree 1)
plus two kinds of inert placeholders created on demand:

* ``d:NAME`` for a coefficient whose differential is not specified (degree 1);
* ``d:GEN`` for a generator without a structure equation (degree 2).

Coefficient polynomials live in a :mod:`sympy` polynomial ring over QQ.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

import sympy
from sympy import QQ
from sympy.parsing.sympy_parser import parse_expr
from sympy.polys.rings import PolyRing

SCHEMA = "paracr-eds/1"
CONN_SCHEMA = "paracr-conn/1"
ATOM_PREFIX = "d:"


class UndeclaredGeneratorError(KeyError):
    pass


class FixtureError(ValueError):
    pass


def _parse_poly(ring: PolyRing, text: str):
    names = {str(s): sympy.Symbol(str(s)) for s in ring.symbols}
    try:
        expr = parse_expr(str(text), local_dict=names, evaluate=True)
    except (SyntaxError, TypeError) as exc:
        raise FixtureError(f"cannot parse coefficient {text!r}: {exc}") from None
    unknown = {str(s) for s in expr.free_symbols} - set(names)
    if unknown:
        raise FixtureError(f"coefficient {text!r} uses undeclared names {sorted(unknown)}")
    return ring.from_expr(expr) if expr.free_symbols else ring(sympy.Rational(expr))


class FormalForm:
    """A formal form attached to a :class:`FormalSystem` (which fixes atom order and ring)."""

    __slots__ = ("system", "degree", "terms")

    def __init__(self, system: "FormalSystem", degree: int, terms: Mapping[tuple, object] | None = None):
        self.system = system
        self.degree = degree
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def monomial(cls, system, atoms: Iterable[str], coeff=1) -> "FormalForm":
        atoms = tuple(atoms)
        sign, mono = system.normalize(atoms)
        deg = sum(system.atom_degree(a) for a in atoms)
        if isinstance(coeff, str):
            coeff = _parse_poly(system.ring, coeff)
        if sign == 0:
            return cls(system, deg)
        return cls(system, deg, {mono: system.ring(coeff) * sign})

    def __add__(self, other: "FormalForm") -> "FormalForm":
        if not other.terms:
            return self
        if not self.terms:
            return other
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degree")
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, self.system.ring.zero) + c
        return FormalForm(self.system, self.degree, terms)

    def __neg__(self) -> "FormalForm":
        return FormalForm(self.system, self.degree, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "FormalForm") -> "FormalForm":
        return self + (-other)

    def scale(self, poly) -> "FormalForm":
        poly = self.system.ring(poly) if not hasattr(poly, "ring") else poly
        return FormalForm(self.system, self.degree, {m: poly * c for m, c in self.terms.items()})

    def __xor__(self, other: "FormalForm") -> "FormalForm":
        return self.system.wedge(self, other)

    def __eq__(self, other):
        return isinstance(other, FormalForm) and self.degree == other.degree and self.terms == other.terms

    def __hash__(self):
        return hash((self.degree, frozenset(self.terms.items())))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def atoms_used(self) -> set:
        return {a for m in self.terms for a in m if a.startswith(ATOM_PREFIX)}

    def classify(self) -> str:
        """``zero``, ``zero_mod_atoms`` (every term carries an unspecified differential) or ``nonzero``."""
        if not self.terms:
            return "zero"
        if all(any(a.startswith(ATOM_PREFIX) for a in m) for m in self.terms):
            return "zero_mod_atoms"
        return "nonzero"

    def plain_terms(self) -> dict:
        """Terms free of ``d:`` atoms; these are the ones a residual cannot hide in."""
        return {m: c for m, c in self.terms.items() if not any(a.startswith(ATOM_PREFIX) for a in m)}

    def map_coefficients(self, func) -> "FormalForm":
        return FormalForm(self.system, self.degree, {m: func(c) for m, c in self.terms.items()})

    def rebase(self, system: "FormalSystem") -> "FormalForm":
        """Same terms, interpreted in another system sharing the coefficient names."""
        if system.ring.symbols != self.system.ring.symbols:
            raise ValueError("systems have different coefficient rings")
        return FormalForm(system, self.degree, dict(self.terms))

    def to_terms(self) -> list:
        return [[str(c.as_expr()), list(m)] for m, c in sorted(self.terms.items())]

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items()):
            parts.append(f"({c.as_expr()})*{'^'.join(m) or '1'}")
        return " + ".join(parts)

    __repr__ = __str__


@dataclass(frozen=True, eq=False)
class FormalSystem:
    """Generators with optional structure equations, coefficients with optional differentials."""

    name: str
    generators: tuple
    coefficients: tuple
    ring: PolyRing
    structure: dict = field(default_factory=dict)
    differentials: dict = field(default_factory=dict)

    # atom bookkeeping -------------------------------------------------------
    def atom_degree(self, atom: str) -> int:
        if atom.startswith(ATOM_PREFIX):
            base = atom[len(ATOM_PREFIX):]
            if base in self.generators:
                return 2
            if base in self.coefficients:
                return 1
            raise UndeclaredGeneratorError(atom)
        if atom in self._order:
            return 1
        raise UndeclaredGeneratorError(atom)

    @property
    def _order(self) -> dict:
        cache = self.__dict__.get("_order_cache")
        if cache is None:
            cache = {g: i for i, g in enumerate(self.generators)}
            object.__setattr__(self, "_order_cache", cache)
        return cache

    def _key(self, atom: str):
        if atom.startswith(ATOM_PREFIX):
            return (1 + (self.atom_degree(atom) == 2), atom)
        return (0, self._order[atom])

    def normalize(self, atoms: tuple) -> tuple:
        """Sort ``atoms`` with Koszul signs; odd atoms anticommute and square to zero."""
        items = list(atoms)
        odd = [self.atom_degree(a) % 2 == 1 for a in items]
        sign = 1
        for i in range(1, len(items)):
            j = i
            while j > 0 and self._key(items[j - 1]) > self._key(items[j]):
                if odd[j - 1] and odd[j]:
                    sign = -sign
                items[j - 1], items[j] = items[j], items[j - 1]
                odd[j - 1], odd[j] = odd[j], odd[j - 1]
                j -= 1
        for a, b, o in zip(items, items[1:], odd):
            if a == b and o:
                return 0, None
        return sign, tuple(items)

    # algebra ------------------------------------------------------------------
    def zero(self, degree: int) -> FormalForm:
        return FormalForm(self, degree)

    def gen(self, name: str, coeff=1) -> FormalForm:
        if name not in self._order:
            raise UndeclaredGeneratorError(name)
        return FormalForm.monomial(self, (name,), coeff)

    def wedge(self, a: FormalForm, b: FormalForm) -> FormalForm:
        terms: dict = {}
        for ma, ca in a.terms.items():
            for mb, cb in b.terms.items():
                sign, mono = self.normalize(ma + mb)
                if sign == 0:
                    continue
                c = ca * cb
                terms[mono] = terms.get(mono, self.ring.zero) + (c if sign == 1 else -c)
        return FormalForm(self, a.degree + b.degree, terms)

    def d_atom(self, atom: str) -> FormalForm:
        if atom.startswith(ATOM_PREFIX):
            return self.zero(self.atom_degree(atom) + 1)
        if atom not in self._order:
            raise UndeclaredGeneratorError(atom)
        eq = self.structure.get(atom)
        if eq is None:
            return FormalForm.monomial(self, (ATOM_PREFIX + atom,))
        return eq

    def d_coefficient(self, name: str) -> FormalForm:
        if name in self.differentials:
            return self.differentials[name]
        return FormalForm.monomial(self, (ATOM_PREFIX + name,))

    def d_poly(self, poly) -> FormalForm:
        out = self.zero(1)
        for i, sym in enumerate(self.ring.gens):
            part = poly.diff(sym)
            if part:
                out = out + self.d_coefficient(self.coefficients[i]).scale(part)
        return out

    def d(self, a: FormalForm) -> FormalForm:
        """Graded Leibniz expansion of ``d a``."""
        out = self.zero(a.degree + 1)
        for mono, c in a.terms.items():
            body = FormalForm.monomial(self, mono)
            out = out + self.wedge(self.d_poly(c), body)
            sign = 1
            for k, x in enumerate(mono):
                piece = self.d_atom(x)
                left = FormalForm.monomial(self, mono[:k])
                right = FormalForm.monomial(self, mono[k + 1:])
                term = self.wedge(self.wedge(left, piece), right)
                out = out + term.scale(c * sign)
                if self.atom_degree(x) % 2:
                    sign = -sign
        return out

    # residuals ----------------------------------------------------------------
    def d_squared_residuals(self) -> dict:
        """``d(d g)`` for every generator with a structure equation and every specified coefficient."""
        out = {}
        for g in self.generators:
            if g in self.structure:
                out[g] = self.d(self.structure[g])
        for c in self.coefficients:
            if c in self.differentials:
                out[ATOM_PREFIX + c] = self.d(self.differentials[c])
        return out

    def with_equations(self, structure=None, differentials=None, name=None) -> "FormalSystem":
        new = FormalSystem(
            name or self.name,
            self.generators,
            self.coefficients,
            self.ring,
            dict(self.structure),
            dict(self.differentials),
        )
        for key, form in (structure or {}).items():
            new.structure[key] = form.rebase(new)
        for key, form in (differentials or {}).items():
            new.differentials[key] = form.rebase(new)
        for key in list(new.structure):
            if key not in (structure or {}):
                new.structure[key] = new.structure[key].rebase(new)
        for key in list(new.differentials):
            if key not in (differentials or {}):
                new.differentials[key] = new.differentials[key].rebase(new)
        return new

    # serialization ----------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "name": self.name,
            "generators": list(self.generators),
            "coefficients": list(self.coefficients),
            "structure": {g: f.to_terms() for g, f in self.structure.items()},
            "differentials": {c: f.to_terms() for c, f in self.differentials.items()},
        }


def classify_residuals(residuals: Mapping[str, FormalForm]) -> dict:
    return {k: v.classify() for k, v in residuals.items()}


def _form_from_terms(system: FormalSystem, terms, degree: int) -> FormalForm:
    out = system.zero(degree)
    for coeff, atoms in terms:
        for a in atoms:
            if a not in system._order:
                raise UndeclaredGeneratorError(a)
        if len(atoms) != degree:
            raise FixtureError(f"term {atoms} should have {degree} factors")
        out = out + FormalForm.monomial(system, tuple(atoms), _parse_poly(system.ring, coeff))
    return out


def system_from_json(data: Mapping, variant: str | None = None) -> FormalSystem:
    if data.get("schema") != SCHEMA:
        raise FixtureError(f"unsupported schema {data.get('schema')!r}")
    coeffs = tuple(data["coefficients"])
    ring = PolyRing(coeffs, QQ) if coeffs else PolyRing([], QQ)
    gens = tuple(data["generators"])
    if len(set(gens)) != len(gens) or len(set(coeffs)) != len(coeffs):
        raise FixtureError("duplicate generator or coefficient names")
    system = FormalSystem(data["name"], gens, coeffs, ring, {}, {})
    diffs = dict(data.get("differentials", {}))
    name = data["name"]
    if variant is not None:
        try:
            override = data["variants"][variant]
        except KeyError:
            raise FixtureError(f"fixture {name!r} has no variant {variant!r}") from None
        diffs.update(override.get("differentials", {}))
        name = f"{name}[{variant}]"
    object.__setattr__(system, "name", name)
    for g, terms in data.get("structure", {}).items():
        if g not in gens:
            raise UndeclaredGeneratorError(g)
        system.structure[g] = _form_from_terms(system, terms, 2)
    for c, terms in diffs.items():
        if c not in coeffs:
            raise FixtureError(f"differential given for undeclared coefficient {c!r}")
        system.differentials[c] = _form_from_terms(system, terms, 1)
    return system


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("paracr") / "fixtures" / name))


def _read_fixture(name_or_path) -> tuple[dict, Path]:
    path = Path(name_or_path)
    if not path.exists():
        candidate = fixture_path(name_or_path if str(name_or_path).endswith(".json") else f"{name_or_path}.json")
        if not candidate.exists():
            raise FileNotFoundError(name_or_path)
        path = candidate
    return json.loads(path.read_text()), path


def load_system(name_or_path, variant: str | None = None) -> FormalSystem:
    data, _ = _read_fixture(name_or_path)
    return system_from_json(data, variant)


def variants(name_or_path) -> list:
    data, _ = _read_fixture(name_or_path)
    return sorted(data.get("variants", {}))


# specialization ---------------------------------------------------------------
def flat_specialize(system: FormalSystem, zeroed: Iterable[str]) -> FormalSystem:
    """Set the named coefficients to zero everywhere; their differentials become zero."""
    zeroed = set(zeroed)
    unknown = zeroed - set(system.coefficients)
    if unknown:
        raise KeyError(f"undeclared coefficients {sorted(unknown)}")
    return substitute_coefficients(system, {z: 0 for z in zeroed}, name=system.name + "|flat")


def extend_coefficients(system: FormalSystem, names: Iterable[str], name: str | None = None) -> FormalSystem:
    """Same equations over a ring with extra coefficient names appended (no differentials given for them)."""
    extra = [n for n in names if n not in system.coefficients]
    if not extra:
        return system
    coeffs = system.coefficients + tuple(extra)
    ring = PolyRing(coeffs, QQ)

    def lift(poly):
        return ring(poly.as_expr()) if poly.is_ground else ring.from_expr(poly.as_expr())

    new = FormalSystem(name or system.name, system.generators, coeffs, ring, {}, {})
    for g, f in system.structure.items():
        new.structure[g] = FormalForm(new, f.degree, {m: lift(c) for m, c in f.terms.items()})
    for c, f in system.differentials.items():
        new.differentials[c] = FormalForm(new, f.degree, {m: lift(p) for m, p in f.terms.items()})
    return new


def _names_in(text: str) -> list:
    return sorted(str(s) for s in parse_expr(str(text), evaluate=False).free_symbols)


def substitute_coefficients(system: FormalSystem, values: Mapping[str, object], name: str | None = None) -> FormalSystem:
    """Replace coefficients by polynomials (given as text, numbers or ring elements).

    A replaced coefficient keeps no differential of its own: if its value is a
    constant its differential is dropped (it is zero), otherwise it is removed
    so that ``d`` acts through the substituted polynomial.  Names appearing
    only in textual values are added to the coefficient ring first.
    """
    fresh = [n for v in values.values() if isinstance(v, str) for n in _names_in(v)]
    system = extend_coefficients(system, dict.fromkeys(fresh))
    ring = system.ring
    pairs = []
    for k, v in values.items():
        gen = ring.gens[system.coefficients.index(k)]
        if isinstance(v, str):
            v = _parse_poly(ring, v)
        pairs.append((gen, ring(v)))

    def sub(poly):
        for gen, val in pairs:
            if poly:
                poly = poly.compose(gen, val)
        return poly

    new = FormalSystem(name or system.name, system.generators, system.coefficients, ring, {}, {})
    for g, f in system.structure.items():
        new.structure[g] = FormalForm(new, f.degree, {m: sub(c) for m, c in f.terms.items()})
    for c, f in system.differentials.items():
        if c in values:
            if values[c] == 0 or (hasattr(values[c], "is_ground") and values[c].is_ground):
                new.differentials[c] = new.zero(1)
            continue
        new.differentials[c] = FormalForm(new, 1, {m: sub(p) for m, p in f.terms.items()})
    for c in values:
        if values[c] == 0:
            new.differentials[c] = new.zero(1)
    return new


def structural_difference(a: FormalSystem, b: FormalSystem) -> dict:
    """Per-generator differences ``a - b`` of structure equations (empty dict if identical)."""
    if a.generators != b.generators:
        raise ValueError("systems have different generators")
    names = {str(s) for s in a.ring.symbols} | {str(s) for s in b.ring.symbols}
    ring = PolyRing(sorted(names), QQ)

    def lift(f: FormalForm):
        return {m: ring.from_expr(c.as_expr()) if not c.is_ground else ring(c.as_expr()) for m, c in f.terms.items()}

    out = {}
    for g in a.generators:
        fa = lift(a.structure.get(g, a.zero(2)))
        fb = lift(b.structure.get(g, b.zero(2)))
        diff = {}
        for m in set(fa) | set(fb):
            c = fa.get(m, ring.zero) - fb.get(m, ring.zero)
            if c:
                diff[m] = c
        if diff:
            out[g] = diff
    return out


# connections ------------------------------------------------------------------
@dataclass(frozen=True)
class ConnectionMatrix:
    entries: tuple
    system: FormalSystem

    def __post_init__(self):
        n = len(self.entries)
        if any(len(row) != n for row in self.entries):
            raise ValueError("connection matrix must be square")
        if any(f.degree != 1 and not f.is_zero for row in self.entries for f in row):
            raise ValueError("connection entries must be 1-forms")

    @property
    def size(self) -> int:
        return len(self.entries)

    def replace_entry(self, i: int, j: int, form: FormalForm) -> "ConnectionMatrix":
        rows = [list(r) for r in self.entries]
        rows[i][j] = form
        return ConnectionMatrix(tuple(tuple(r) for r in rows), self.system)

    def rebase(self, system: FormalSystem) -> "ConnectionMatrix":
        return ConnectionMatrix(tuple(tuple(f.rebase(system) for f in r) for r in self.entries), system)


def connection_curvature(w: ConnectionMatrix, system: FormalSystem | None = None) -> list:
    """``K = dw + w ^ w`` entrywise, with ``(w ^ w)_ij = sum_k w_ik ^ w_kj``."""
    system = system or w.system
    if system is not w.system:
        w = w.rebase(system)
    n = w.size
    K = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = system.d(w.entries[i][j]) if not w.entries[i][j].is_zero else system.zero(2)
            for k in range(n):
                acc = acc + system.wedge(w.entries[i][k], w.entries[k][j])
            row.append(acc)
        K.append(row)
    return K


def load_connection(name_or_path="conn_sp.json", system: FormalSystem | None = None) -> ConnectionMatrix:
    data, path = _read_fixture(name_or_path)
    if data.get("schema") != CONN_SCHEMA:
        raise FixtureError(f"unsupported schema {data.get('schema')!r}")
    if system is None:
        sibling = path.parent / data["system"]
        system = load_system(sibling if sibling.exists() else data["system"])
    rows = []
    for row in data["matrix"]:
        out = []
        for entry in row:
            f = system.zero(1)
            for coeff, gen in entry:
                f = f + system.gen(gen, _parse_poly(system.ring, coeff))
            out.append(f)
        rows.append(tuple(out))
    return ConnectionMatrix(tuple(rows), system)


def only_horizontal(K: list, horizontal: Iterable[str]) -> bool:
    """True when every curvature term is a wedge of ``horizontal`` generators only."""
    horizontal = set(horizontal)
    return all(set(m) <= horizontal for row in K for f in row for m in f.terms)


# mutation testing -------------------------------------------------------------
@dataclass(frozen=True)
class Mutation:
    where: str
    monomial: tuple

    def __str__(self):
        return f"{self.where}:{'^'.join(self.monomial)}"


def structure_mutations(system: FormalSystem):
    """Yield ``(Mutation, system)`` with the sign of one structure-equation term flipped."""
    for g in system.generators:
        eq = system.structure.get(g)
        if eq is None:
            continue
        for mono in sorted(eq.terms):
            flipped = dict(eq.terms)
            flipped[mono] = -flipped[mono]
            new = system.with_equations(structure={g: FormalForm(system, 2, flipped)})
            yield Mutation(g, mono), new


def connection_mutations(w: ConnectionMatrix):
    """Yield ``(Mutation, matrix)`` with one term of one entry sign-flipped."""
    for i, row in enumerate(w.entries):
        for j, f in enumerate(row):
            for mono in sorted(f.terms):
                flipped = dict(f.terms)
                flipped[mono] = -flipped[mono]
                yield Mutation(f"w[{i + 1},{j + 1}]", mono), w.replace_entry(i, j, FormalForm(w.system, 1, flipped))


def first_nonzero(residuals: Mapping[str, FormalForm]):
    """``(key, monomial, coefficient)`` of the first nonzero residual term, or ``None``."""
    for k in sorted(residuals):
        f = residuals[k]
        if f.terms:
            m = sorted(f.terms)[0]
            return k, m, f.terms[m]
    return None


def verify_fixture(name_or_path, variant: str | None = None, zeroed: Iterable[str] = ()) -> dict:
    """Summary used by the command line: d^2 classifications of a fixture."""
    system = load_system(name_or_path, variant)
    zeroed = list(zeroed)
    if zeroed:
        system = flat_specialize(system, zeroed)
    residuals = system.d_squared_residuals()
    classes = classify_residuals(residuals)
    return {
        "system": system.name,
        "zeroed": sorted(zeroed),
        "residuals": {k: {"class": classes[k], "terms": residuals[k].to_terms()} for k in sorted(residuals)},
        "all_zero": all(c == "zero" for c in classes.values()),
    }
