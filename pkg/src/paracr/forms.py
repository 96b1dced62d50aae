"""Concrete differential forms on a coordinate chart.

A :class:`KForm` is a sparse map from strictly increasing index tuples into a
fixed basis of 1-forms to expression coefficients.  The basis is either the
coordinate differentials of a chart or a declared :class:`Coframe`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .expr import ONE, ZERO, Const, Expr, add, as_expr, diff, is_const, mul, neg, substitute
from .identity import DEFAULT, IdentityConfig, ZeroVerdict, all_zero
from .jet import COORDS, PdeSystem
from .simplify import simplify, solve_matrix_inverse


class BasisMismatchError(ValueError):
    pass


class DependentFormsError(ValueError):
    pass


@dataclass(frozen=True)
class Basis:
    """Names of the basis 1-forms; ``coords`` is set for coordinate-differential bases."""

    names: tuple
    coords: tuple | None = None

    @classmethod
    def coordinate(cls, coords: Sequence[str]) -> "Basis":
        coords = tuple(coords)
        return cls(tuple("d" + c for c in coords), coords)

    @property
    def dim(self) -> int:
        return len(self.names)


JET = Basis.coordinate(COORDS)


def _sort_sign(idx):
    """Sort ``idx`` by bubble sort; return (sign, sorted tuple) or (0, None) on repeats."""
    idx = list(idx)
    sign = 1
    n = len(idx)
    for i in range(n):
        for j in range(n - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
            elif idx[j] == idx[j + 1]:
                return 0, None
    if n > 1 and any(idx[k] == idx[k + 1] for k in range(n - 1)):
        return 0, None
    return sign, tuple(idx)


class KForm:
    """Degree-``degree`` form ``sum c_I e^I`` over ``basis``."""

    __slots__ = ("degree", "basis", "terms")

    def __init__(self, degree: int, basis: Basis, terms: Mapping[tuple, Expr] | None = None):
        self.degree = degree
        self.basis = basis
        clean = {}
        for idx, c in (terms or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError("index tuple length must equal the degree")
            if list(idx) != sorted(set(idx)):
                raise ValueError("index tuples must be strictly increasing")
            c = as_expr(c)
            if not is_const(c, 0):
                clean[idx] = c
        self.terms = clean

    # construction helpers -----------------------------------------------
    @classmethod
    def function(cls, f, basis: Basis = JET) -> "KForm":
        return cls(0, basis, {(): as_expr(f)})

    @classmethod
    def one_form(cls, coeffs: Mapping[str, Expr] | Sequence[Expr], basis: Basis = JET) -> "KForm":
        if isinstance(coeffs, Mapping):
            return cls(1, basis, {(basis.names.index(k),): v for k, v in coeffs.items()})
        return cls(1, basis, {(i,): v for i, v in enumerate(coeffs)})

    @classmethod
    def basis_form(cls, i: int, basis: Basis = JET) -> "KForm":
        return cls(1, basis, {(i,): ONE})

    @classmethod
    def zero(cls, degree: int, basis: Basis = JET) -> "KForm":
        return cls(degree, basis)

    def _check(self, other: "KForm"):
        if self.basis != other.basis:
            raise BasisMismatchError(f"{self.basis.names} vs {other.basis.names}")

    # algebra --------------------------------------------------------------
    def __add__(self, other: "KForm") -> "KForm":
        self._check(other)
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degree")
        terms = dict(self.terms)
        for idx, c in other.terms.items():
            terms[idx] = add(terms[idx], c) if idx in terms else c
        return KForm(self.degree, self.basis, terms)

    def __neg__(self) -> "KForm":
        return KForm(self.degree, self.basis, {i: neg(c) for i, c in self.terms.items()})

    def __sub__(self, other: "KForm") -> "KForm":
        return self + (-other)

    def scale(self, f) -> "KForm":
        f = as_expr(f)
        return KForm(self.degree, self.basis, {i: mul(f, c) for i, c in self.terms.items()})

    def __rmul__(self, f) -> "KForm":
        return self.scale(f)

    def __xor__(self, other: "KForm") -> "KForm":
        return wedge(self, other)

    def map_coefficients(self, func) -> "KForm":
        return KForm(self.degree, self.basis, {i: func(c) for i, c in self.terms.items()})

    def simplify(self) -> "KForm":
        return self.map_coefficients(simplify)

    def coefficient(self, *names_or_idx) -> Expr:
        idx = []
        for x in names_or_idx:
            idx.append(self.basis.names.index(x) if isinstance(x, str) else x)
        sign, key = _sort_sign(idx)
        if sign == 0:
            return ZERO
        c = self.terms.get(key, ZERO)
        return c if sign == 1 else neg(c)

    def verdict(self, cfg: IdentityConfig = DEFAULT) -> ZeroVerdict:
        """Zero verdict for the whole form (all coefficients)."""
        return all_zero(self.terms.values(), cfg)

    @property
    def structurally_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        if not self.terms:
            return f"KForm[{self.degree}](0)"
        parts = []
        for idx, c in sorted(self.terms.items()):
            mono = "^".join(self.basis.names[i] for i in idx) or "1"
            parts.append(f"({c})*{mono}")
        return " + ".join(parts)


def wedge(a: KForm, b: KForm) -> KForm:
    a._check(b)
    if a.degree + b.degree > a.basis.dim:
        return KForm.zero(a.degree + b.degree, a.basis)
    terms: dict = {}
    for ia, ca in a.terms.items():
        for ib, cb in b.terms.items():
            sign, key = _sort_sign(ia + ib)
            if sign == 0:
                continue
            c = mul(ca, cb) if sign == 1 else mul(-1, ca, cb)
            terms[key] = add(terms[key], c) if key in terms else c
    return KForm(a.degree + b.degree, a.basis, terms)


def wedge_all(forms: Sequence[KForm]) -> KForm:
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def _require_coordinates(a: KForm):
    if a.basis.coords is None:
        raise BasisMismatchError("operation needs a coordinate-differential basis; use change_basis first")


def exterior_derivative(a: KForm) -> KForm:
    _require_coordinates(a)
    coords = a.basis.coords
    terms: dict = {}
    for idx, c in a.terms.items():
        for j, v in enumerate(coords):
            dc = diff(c, v)
            if is_const(dc, 0):
                continue
            sign, key = _sort_sign((j,) + idx)
            if sign == 0:
                continue
            t = dc if sign == 1 else neg(dc)
            terms[key] = add(terms[key], t) if key in terms else t
    return KForm(a.degree + 1, a.basis, terms)


d = exterior_derivative


def differential(f, basis: Basis = JET) -> KForm:
    return exterior_derivative(KForm.function(f, basis))


@dataclass(frozen=True)
class VectorField:
    components: Mapping[str, Expr]
    basis: Basis = JET

    def component(self, coord: str) -> Expr:
        return as_expr(self.components.get(coord, ZERO))

    def __call__(self, f) -> Expr:
        f = as_expr(f)
        return add(*(mul(self.component(v), diff(f, v)) for v in self.basis.coords))


def interior_product(X: VectorField, a: KForm) -> KForm:
    _require_coordinates(a)
    if X.basis != a.basis:
        raise BasisMismatchError("vector field and form live on different charts")
    if a.degree == 0:
        return KForm.zero(0, a.basis)
    coords = a.basis.coords
    terms: dict = {}
    for idx, c in a.terms.items():
        for m, i in enumerate(idx):
            xi = X.component(coords[i])
            if is_const(xi, 0):
                continue
            key = idx[:m] + idx[m + 1:]
            t = mul(xi, c) if m % 2 == 0 else mul(-1, xi, c)
            terms[key] = add(terms[key], t) if key in terms else t
    return KForm(a.degree - 1, a.basis, terms)


def lie_derivative(X: VectorField, a: KForm) -> KForm:
    """Cartan's formula ``L_X a = i_X da + d(i_X a)``."""
    first = interior_product(X, exterior_derivative(a))
    if a.degree == 0:
        return first
    return first + exterior_derivative(interior_product(X, a))


def substitute_basis(a: KForm, images: Sequence[KForm]) -> KForm:
    """Replace basis element ``i`` by the 1-form ``images[i]`` and expand multilinearly."""
    target = images[0].basis
    out = KForm.zero(a.degree, target)
    for idx, c in a.terms.items():
        if not idx:
            out = out + KForm.function(c, target)
            continue
        out = out + wedge_all([images[i] for i in idx]).scale(c)
    return out


@dataclass(frozen=True, eq=False)
class Coframe:
    """Five (or n) 1-forms in a coordinate basis with the transition matrix and its inverse.

    ``matrix[i][j]`` is the coefficient of ``d coords[j]`` in ``forms[i]``;
    ``inverse[j][i]`` the coefficient of ``forms[i]`` in ``d coords[j]``.
    """

    forms: tuple
    matrix: tuple
    inverse: tuple
    label: str = "w"

    @classmethod
    def from_forms(cls, forms: Sequence[KForm], label: str = "w", inverse=None) -> "Coframe":
        basis = forms[0].basis
        _require_coordinates(forms[0])
        n = basis.dim
        matrix = tuple(tuple(f.terms.get((j,), ZERO) for j in range(n)) for f in forms)
        if inverse is None:
            inverse = solve_matrix_inverse([list(r) for r in matrix])
        return cls(tuple(forms), matrix, tuple(tuple(r) for r in inverse), label)

    @property
    def coordinate_basis(self) -> Basis:
        return self.forms[0].basis

    @property
    def basis(self) -> Basis:
        return Basis(tuple(f"{self.label}{i + 1}" for i in range(len(self.forms))))

    def __getitem__(self, i: int) -> KForm:
        """``self[1]`` is the first form (1-based, matching the usual naming)."""
        return self.forms[i - 1]

    def check_inverse(self, cfg: IdentityConfig = DEFAULT) -> ZeroVerdict:
        n = len(self.forms)
        entries = []
        for i in range(n):
            for k in range(n):
                s = add(*(mul(self.matrix[i][j], self.inverse[j][k]) for j in range(n)))
                entries.append(add(s, Const(-1)) if i == k else s)
        return all_zero(entries, cfg)


def change_basis(a: KForm, cf: Coframe, to: str = "coframe") -> KForm:
    """Rewrite ``a`` between the coordinate basis and the coframe basis of ``cf``."""
    n = len(cf.forms)
    if to == "coframe":
        if a.basis != cf.coordinate_basis:
            raise BasisMismatchError("form is not in the coframe's coordinate basis")
        target = cf.basis
        images = [KForm(1, target, {(i,): cf.inverse[j][i] for i in range(n)}) for j in range(n)]
    elif to == "coordinates":
        if a.basis != cf.basis:
            raise BasisMismatchError("form is not in the coframe basis")
        images = list(cf.forms)
    else:
        raise ValueError("to must be 'coframe' or 'coordinates'")
    if a.degree == 0:
        target = images[0].basis
        return KForm(0, target, dict(a.terms))
    return substitute_basis(a, images)


def standard_coframe(sys: PdeSystem) -> Coframe:
    """``w1 = dz - p dx - G dy``, ``w2 = dp - r dx - DG dy``, ``w3 = dr - H dx - D^2G dy``, ``w4 = dx``, ``w5 = dy``."""
    G, DG, D2G, H = sys.G, sys.DG(1), sys.DG(2), sys.H
    one = KForm.one_form
    forms = (
        one({"dz": ONE, "dx": neg(as_expr("p")), "dy": neg(G)}),
        one({"dp": ONE, "dx": neg(as_expr("r")), "dy": neg(DG)}),
        one({"dr": ONE, "dx": neg(H), "dy": neg(D2G)}),
        one({"dx": ONE}),
        one({"dy": ONE}),
    )
    # rows: dx, dy, dz, dp, dr in terms of w1..w5
    inverse = (
        (ZERO, ZERO, ZERO, ONE, ZERO),
        (ZERO, ZERO, ZERO, ZERO, ONE),
        (ONE, ZERO, ZERO, as_expr("p"), G),
        (ZERO, ONE, ZERO, as_expr("r"), DG),
        (ZERO, ZERO, ONE, H, D2G),
    )
    return Coframe.from_forms(forms, inverse=inverse)


@dataclass(frozen=True)
class LeviForm:
    matrix: tuple
    remainder: KForm

    @property
    def det(self) -> Expr:
        (a, b), (c, e) = self.matrix
        return add(mul(a, e), mul(-1, b, c))


class LeviExtractionError(RuntimeError):
    pass


def levi_form(sys: PdeSystem, cfg: IdentityConfig = DEFAULT) -> LeviForm:
    """Read ``L_AB`` off ``dw1`` expanded in the standard coframe.

    ``L11, L12, L21, L22`` are the coefficients of ``w2^w4, w2^w5, w3^w4, w3^w5``;
    the rest of ``dw1`` must vanish modulo ``w1``.
    """
    cf = standard_coframe(sys)
    dw1 = change_basis(exterior_derivative(cf[1]), cf).simplify()
    L = ((dw1.coefficient(1, 3), dw1.coefficient(1, 4)), (dw1.coefficient(2, 3), dw1.coefficient(2, 4)))
    rem_terms = {k: v for k, v in dw1.terms.items() if k not in {(1, 3), (1, 4), (2, 3), (2, 4)}}
    remainder = KForm(2, dw1.basis, rem_terms)
    check = wedge(remainder, KForm.basis_form(0, dw1.basis)).verdict(cfg)
    if not check.zero:
        raise LeviExtractionError(f"dw1 - L-terms is not zero modulo w1: {remainder}")
    return LeviForm(L, remainder)


def frobenius_residual(generators: Sequence[KForm], cfg: IdentityConfig = DEFAULT) -> list[KForm]:
    """``d theta_a ^ theta_1 ^ ... ^ theta_k`` for each generator; all zero iff integrable."""
    top = wedge_all(list(generators))
    if top.verdict(cfg).zero:
        raise DependentFormsError("generators are linearly dependent")
    return [wedge(exterior_derivative(g), top) for g in generators]


def pullback(a: KForm, mapping: Mapping[str, Expr], target: Basis) -> KForm:
    """Pull ``a`` back along ``source coords = mapping(target coords)``."""
    _require_coordinates(a)
    images = []
    for v in a.basis.coords:
        phi = as_expr(mapping.get(v, v))
        images.append(differential(phi, target))
    subs = {k: as_expr(v) for k, v in mapping.items()}
    coeffs = KForm(a.degree, a.basis, {i: substitute(c, subs) for i, c in a.terms.items()})
    if a.degree == 0:
        return KForm(0, target, dict(coeffs.terms))
    return substitute_basis(coeffs, images)


def symmetry_residuals(X: VectorField, sys: PdeSystem) -> list[KForm]:
    """The five wedge conditions characterizing infinitesimal symmetries."""
    cf = standard_coframe(sys)
    w = cf.forms
    L = [lie_derivative(X, f) for f in w]
    w123 = wedge_all([w[0], w[1], w[2]])
    w145 = wedge_all([w[0], w[3], w[4]])
    return [
        wedge(L[0], w[0]),
        wedge(L[1], w123),
        wedge(L[2], w123),
        wedge(L[3], w145),
        wedge(L[4], w145),
    ]


def is_symmetry(X: VectorField, sys: PdeSystem, cfg: IdentityConfig = DEFAULT) -> bool:
    return all(r.verdict(cfg).zero for r in symmetry_residuals(X, sys))
