"""Render expressions in the ASCII grammar accepted by :func:`paracr.parser.parse`."""

from __future__ import annotations

from fractions import Fraction

from .expr import Add, Const, Div, Expr, Fn, Mul, Pow, Var

_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5


def _const(v: Fraction) -> tuple[str, int]:
    if v.denominator == 1:
        s = str(v.numerator)
    else:
        s = f"{v.numerator}/{v.denominator}"
    if v < 0:
        return s, _NEG
    return s, (_ATOM if v.denominator == 1 else _MUL)


def _wrap(pair: tuple[str, int], min_prec: int) -> str:
    s, prec = pair
    return s if prec >= min_prec else f"({s})"


def _render(e: Expr, memo: dict) -> tuple[str, int]:
    hit = memo.get(id(e))
    if hit is not None:
        return hit
    if isinstance(e, Const):
        out = _const(e.value)
    elif isinstance(e, Var):
        out = (e.name, _ATOM)
    elif isinstance(e, Fn):
        args = ", ".join(_render(a, memo)[0] for a in e.args)
        if len(e.args) == 1:
            out = (f"{e.name}{chr(39) * e.orders[0]}({args})", _ATOM)
        elif any(e.orders):
            idx = ",".join(str(k) for k in e.orders)
            out = (f"D[{e.name},{idx}]({args})", _ATOM)
        else:
            out = (f"{e.name}({args})", _ATOM)
    elif isinstance(e, Add):
        parts = []
        for i, t in enumerate(e.terms):
            s, prec = _render(t, memo)
            if i == 0:
                parts.append(s if prec > _ADD else f"({s})")
            elif prec == _NEG and s.startswith("-"):
                parts.append(" - " + s[1:])
            else:
                parts.append(" + " + (s if prec > _ADD else f"({s})"))
        out = ("".join(parts), _ADD)
    elif isinstance(e, Mul):
        fs = list(e.factors)
        sign = ""
        if isinstance(fs[0], Const) and fs[0].value == -1:
            sign = "-"
            fs = fs[1:]
        pieces = []
        for i, f in enumerate(fs):
            if isinstance(f, Const) and i == 0:
                pieces.append(_const(f.value)[0])
            elif isinstance(f, Div):
                pieces.append("(" + _render(f, memo)[0] + ")")
            else:
                pieces.append(_wrap(_render(f, memo), _POW))
        body = "*".join(pieces)
        if sign:
            out = ("-" + body, _NEG)
        elif isinstance(fs[0], Const) and fs[0].value < 0:
            out = (body, _NEG)
        else:
            out = (body, _MUL)
    elif isinstance(e, Pow):
        base = _wrap(_render(e.base, memo), _ATOM)
        exp = str(e.exp) if e.exp >= 0 else f"({e.exp})"
        out = (f"{base}^{exp}", _POW)
    elif isinstance(e, Div):
        num = _render(e.num, memo)
        num_s = num[0] if num[1] >= _MUL and not isinstance(e.num, Div) else f"({num[0]})"
        den = _render(e.den, memo)
        den_s = den[0] if den[1] >= _POW else f"({den[0]})"
        out = (f"{num_s}/{den_s}", _MUL)
    else:
        raise TypeError(f"unknown node {type(e).__name__}")
    memo[id(e)] = out
    return out


def to_string(e: Expr) -> str:
    return _render(e, {})[0]
