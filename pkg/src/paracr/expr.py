"""Immutable expression trees over coordinates, exact rationals and opaque functions.

Nodes are built through the smart constructors :func:`add`, :func:`mul`,
:func:`power`, :func:`div` and :func:`neg`, which flatten nested sums and
products and fold rational constants but never reorder or collect terms.
Full rational-function normalization lives in :mod:`paracr.simplify`.

An opaque function application ``Fn`` carries one derivative order per
argument, so ``f'''(p)`` is a single node ``Fn('f', (p,), (3,))`` and the
partial ``G_pp`` of ``G(x, y, z, p)`` is ``Fn('G', (x, y, z, p), (0, 0, 0, 2))``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

Number = Union[int, Fraction]


class Expr:
    """Base class of all expression nodes."""

    __slots__ = ("_hash", "_free", "_fns")

    def _key(self):
        raise NotImplementedError

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            h = hash((type(self).__name__, self._key()))
            object.__setattr__(self, "_hash", h)
            return h

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other):
            return NotImplemented if not isinstance(other, Expr) else False
        return hash(self) == hash(other) and self._key() == other._key()

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    # arithmetic sugar -------------------------------------------------
    # Foreign operands yield NotImplemented so e.g. ``Expr * KForm`` reaches KForm.__rmul__.
    def __add__(self, other):
        return add(self, other) if _scalar(other) else NotImplemented

    def __radd__(self, other):
        return add(other, self) if _scalar(other) else NotImplemented

    def __sub__(self, other):
        return add(self, neg(as_expr(other))) if _scalar(other) else NotImplemented

    def __rsub__(self, other):
        return add(other, neg(self)) if _scalar(other) else NotImplemented

    def __mul__(self, other):
        return mul(self, other) if _scalar(other) else NotImplemented

    def __rmul__(self, other):
        return mul(other, self) if _scalar(other) else NotImplemented

    def __truediv__(self, other):
        return div(self, other) if _scalar(other) else NotImplemented

    def __rtruediv__(self, other):
        return div(other, self) if _scalar(other) else NotImplemented

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("exponents must be integers")
        return power(self, n)

    def __neg__(self):
        return neg(self)

    def __str__(self):
        from .printer import to_string

        return to_string(self)

    def __repr__(self):
        return f"{type(self).__name__}<{self}>"

    @property
    def children(self) -> tuple:
        return ()

    @property
    def free_vars(self) -> frozenset:
        """Names of coordinates occurring anywhere in the tree (including function arguments)."""
        try:
            return self._free
        except AttributeError:
            out = frozenset().union(*(c.free_vars for c in self.children))
            object.__setattr__(self, "_free", out)
            return out

    @property
    def functions(self) -> frozenset:
        """Pairs ``(name, arity)`` of opaque functions occurring in the tree."""
        try:
            return self._fns
        except AttributeError:
            out = frozenset().union(*(c.functions for c in self.children))
            object.__setattr__(self, "_fns", out)
            return out


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Number):
        value = Fraction(value)
        object.__setattr__(self, "value", value)

    def _key(self):
        return self.value

    @property
    def free_vars(self):
        return frozenset()


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def _key(self):
        return self.name

    @property
    def free_vars(self):
        return frozenset((self.name,))


class Fn(Expr):
    """Opaque function ``name`` applied to ``args`` and differentiated ``orders[i]`` times in slot i."""

    __slots__ = ("name", "args", "orders")

    def __init__(self, name: str, args: Iterable[Expr], orders: Iterable[int] | None = None):
        args = tuple(args)
        orders = tuple(orders) if orders is not None else (0,) * len(args)
        if len(orders) != len(args) or any(k < 0 for k in orders):
            raise ValueError("derivative orders must be one non-negative integer per argument")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "orders", orders)

    def _key(self):
        return (self.name, self.args, self.orders)

    @property
    def children(self):
        return self.args

    @property
    def functions(self):
        try:
            return self._fns
        except AttributeError:
            out = frozenset(((self.name, len(self.args)),)).union(*(a.functions for a in self.args))
            object.__setattr__(self, "_fns", out)
            return out

    def derivative(self, slot: int, times: int = 1) -> "Fn":
        orders = list(self.orders)
        orders[slot] += times
        return Fn(self.name, self.args, orders)


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: tuple):
        object.__setattr__(self, "terms", tuple(terms))

    def _key(self):
        return self.terms

    @property
    def children(self):
        return self.terms


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: tuple):
        object.__setattr__(self, "factors", tuple(factors))

    def _key(self):
        return self.factors

    @property
    def children(self):
        return self.factors


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: int):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exp", int(exp))

    def _key(self):
        return (self.base, self.exp)

    @property
    def children(self):
        return (self.base,)


class Div(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num: Expr, den: Expr):
        if isinstance(den, Const) and den.value == 0:
            raise ZeroDivisionError("denominator is the literal zero")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def _key(self):
        return (self.num, self.den)

    @property
    def children(self):
        return (self.num, self.den)


ZERO = Const(0)
ONE = Const(1)


def _scalar(obj) -> bool:
    return isinstance(obj, (Expr, int, Fraction, str)) and not isinstance(obj, bool)


def as_expr(obj) -> Expr:
    if isinstance(obj, Expr):
        return obj
    if isinstance(obj, (int, Fraction)):
        return Const(obj)
    if isinstance(obj, str):
        return Var(obj)
    raise TypeError(f"cannot convert {obj!r} to an expression")


def is_const(e: Expr, value=None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# smart constructors -------------------------------------------------------

def add(*terms) -> Expr:
    flat = []
    total = Fraction(0)
    for t in terms:
        t = as_expr(t)
        parts = t.terms if isinstance(t, Add) else (t,)
        for part in parts:
            if isinstance(part, Const):
                total += part.value
            else:
                flat.append(part)
    if total != 0:
        flat.insert(0, Const(total))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def mul(*factors) -> Expr:
    flat = []
    coeff = Fraction(1)
    for f in factors:
        f = as_expr(f)
        parts = f.factors if isinstance(f, Mul) else (f,)
        for part in parts:
            if isinstance(part, Const):
                if part.value == 0:
                    return ZERO
                coeff *= part.value
            else:
                flat.append(part)
    if coeff != 1 or not flat:
        flat.insert(0, Const(coeff))
    if len(flat) == 1:
        return flat[0]
    return Mul(tuple(flat))


def neg(e) -> Expr:
    e = as_expr(e)
    if isinstance(e, Const):
        return Const(-e.value)
    if isinstance(e, Add):
        return add(*(neg(t) for t in e.terms))
    return mul(Const(-1), e)


def power(base, n: int) -> Expr:
    base = as_expr(base)
    n = int(n)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and n < 0:
            raise ZeroDivisionError("zero raised to a negative power")
        return Const(base.value ** n)
    if isinstance(base, Pow):
        return power(base.base, base.exp * n)
    return Pow(base, n)


def div(num, den) -> Expr:
    num, den = as_expr(num), as_expr(den)
    if isinstance(den, Const):
        if den.value == 0:
            raise ZeroDivisionError("division by the literal zero")
        return mul(Const(1 / den.value), num)
    if is_const(num, 0):
        return ZERO
    return Div(num, den)


def fn(name: str, *args, orders=None) -> Fn:
    return Fn(name, tuple(as_expr(a) for a in args), orders)


def symbols(names: str):
    return tuple(Var(n) for n in names.replace(",", " ").split())


# calculus and rewriting ---------------------------------------------------

@lru_cache(maxsize=1 << 16)
def diff(e: Expr, v: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to the coordinate ``v``."""
    if v not in e.free_vars:
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Fn):
        return add(*(mul(e.derivative(i), diff(a, v)) for i, a in enumerate(e.args)))
    if isinstance(e, Add):
        return add(*(diff(t, v) for t in e.terms))
    if isinstance(e, Mul):
        fs = e.factors
        out = []
        for i, f in enumerate(fs):
            df = diff(f, v)
            if is_const(df, 0):
                continue
            out.append(mul(*fs[:i], df, *fs[i + 1:]))
        return add(*out)
    if isinstance(e, Pow):
        return mul(Const(e.exp), power(e.base, e.exp - 1), diff(e.base, v))
    if isinstance(e, Div):
        dn, dd = diff(e.num, v), diff(e.den, v)
        if is_const(dd, 0):
            return div(dn, e.den)
        return div(add(mul(dn, e.den), neg(mul(e.num, dd))), power(e.den, 2))
    raise TypeError(f"unknown node {type(e).__name__}")


def diff_n(e: Expr, *vs: str) -> Expr:
    for v in vs:
        e = diff(e, v)
    return e


def substitute(e: Expr, bindings: Mapping[str, Expr]) -> Expr:
    """Simultaneously replace coordinates by expressions; unbound coordinates are kept."""
    bindings = {k: as_expr(v) for k, v in bindings.items()}
    if not bindings:
        return e
    keys = frozenset(bindings)
    memo: dict[int, Expr] = {}

    def go(node: Expr) -> Expr:
        if not (node.free_vars & keys):
            return node
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        if isinstance(node, Var):
            out = bindings[node.name]
        elif isinstance(node, Fn):
            out = Fn(node.name, tuple(go(a) for a in node.args), node.orders)
        elif isinstance(node, Add):
            out = add(*(go(t) for t in node.terms))
        elif isinstance(node, Mul):
            out = mul(*(go(f) for f in node.factors))
        elif isinstance(node, Pow):
            out = power(go(node.base), node.exp)
        elif isinstance(node, Div):
            out = div(go(node.num), go(node.den))
        else:
            raise TypeError(f"unknown node {type(node).__name__}")
        memo[id(node)] = out
        return out

    return go(e)


def replace_functions(e: Expr, rule) -> Expr:
    """Rebuild ``e`` with every ``Fn`` node passed through ``rule`` (return ``None`` to keep it)."""
    memo: dict[int, Expr] = {}

    def go(node: Expr) -> Expr:
        if not node.functions:
            return node
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        if isinstance(node, Fn):
            node2 = Fn(node.name, tuple(go(a) for a in node.args), node.orders)
            out = rule(node2)
            out = node2 if out is None else out
        elif isinstance(node, Add):
            out = add(*(go(t) for t in node.terms))
        elif isinstance(node, Mul):
            out = mul(*(go(f) for f in node.factors))
        elif isinstance(node, Pow):
            out = power(go(node.base), node.exp)
        elif isinstance(node, Div):
            out = div(go(node.num), go(node.den))
        else:
            out = node
        memo[id(node)] = out
        return out

    return go(e)


def node_count(e: Expr) -> int:
    """Number of distinct nodes (shared subtrees counted once)."""
    seen: set[int] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.extend(node.children)
    return len(seen)
