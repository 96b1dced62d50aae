from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import same, to_sympy
from paracr import ParseError, parse, to_string
from paracr.evaluate import Point, Polynomial, SingularPointError, UnboundSymbolError, evaluate
from paracr.expr import Const, Div, Fn, Var, add, diff, div, mul, power, substitute
from paracr.identity import is_zero
from paracr.simplify import simplify
from strategies import COORDS, rational_functions

p, r, X, Q, q = Var("p"), Var("r"), Var("X"), Var("Q"), Var("q")


class TestNodes:
    def test_constants_in_lowest_terms(self):
        assert Const(Fraction(6, 8)).value == Fraction(3, 4)

    def test_literal_zero_denominator_rejected(self):
        with pytest.raises(ZeroDivisionError):
            Div(p, Const(0))

    def test_immutable(self):
        with pytest.raises(AttributeError):
            p.name = "q"

    def test_structural_equality_and_hash(self):
        a = parse("p^2 + r")
        b = parse("p^2 + r")
        assert a == b and hash(a) == hash(b)
        assert a != parse("r + p^3")

    def test_negative_powers_allowed(self):
        e = power(p, -2)
        assert evaluate(e, {"p": Fraction(2)}) == Fraction(1, 4)


class TestParse:
    def test_quarter_square(self):
        e = parse("p^2/4")
        assert evaluate(e, {"p": Fraction(2)}) == 1
        assert parse(to_string(e)) == e

    def test_f_family_H(self):
        e = parse("-r^2*f'''(p)/f''(p)")
        f3 = Fn("f", (p,), (3,))
        f2 = Fn("f", (p,), (2,))
        assert e.functions == {("f", 1)}
        assert same(to_sympy(e), to_sympy(mul(-1, power(r, 2), div(f3, f2))))

    def test_declared_partials(self):
        e = parse("2*G_ppp + G_pp*H_rr", functions={"G": "xyzp", "H": "xyzpr"})
        assert ("G", 4) in e.functions and ("H", 5) in e.functions
        G_ppp = Fn("G", tuple(Var(c) for c in "xyzp"), (0, 0, 0, 3))
        assert G_ppp in set(_walk(e))

    def test_D_bracket_notation(self):
        assert parse("D[f,3](p)") == parse("f'''(p)")

    def test_error_offset(self):
        with pytest.raises(ParseError) as info:
            parse("p + * r")
        assert info.value.offset == 4

    def test_unknown_token(self):
        with pytest.raises(ParseError):
            parse("p $ r")

    def test_non_integer_exponent(self):
        with pytest.raises(ParseError):
            parse("p^(1/2)")

    @given(rational_functions())
    def test_print_parse_round_trip(self, e):
        assert parse(to_string(e)) == e


def _walk(e):
    yield e
    for c in e.children:
        yield from _walk(c)


class TestDiff:
    def test_quarter_square(self):
        assert diff(parse("p^2/4"), "p") == parse("p/2")

    def test_opaque_orders(self):
        f = Fn("f", (p,))
        assert diff(diff(f, "p"), "p") == Fn("f", (p,), (2,))

    def test_five_p_derivatives_of_G(self):
        G = parse("G", functions={"G": "xyzp"})
        e = G
        for _ in range(5):
            e = diff(e, "p")
        assert e == parse("G_ppppp", functions={"G": "xyzp"})

    def test_chain_rule(self):
        e = Fn("f", (mul(2, p),))
        assert same(to_sympy(diff(e, "p")), to_sympy(mul(2, Fn("f", (mul(2, p),), (1,)))))

    def test_constant(self):
        assert diff(Const(7), "p") == Const(0)

    @given(rational_functions(), st.sampled_from(COORDS))
    def test_against_sympy(self, e, v):
        import sympy as sp

        assert same(to_sympy(diff(e, v)), sp.diff(to_sympy(e), sp.Symbol(v)))

    @given(rational_functions(), st.sampled_from(COORDS), st.sampled_from(COORDS))
    def test_mixed_partials_commute(self, e, v, w):
        assert is_zero(add(diff(diff(e, v), w), mul(-1, diff(diff(e, w), v)))).zero


class TestSubstitute:
    def test_p_to_X(self):
        z_expr = parse("Y - P*p + q*(p*f'(p) - f(p))/f''(p)")
        out = substitute(z_expr, {"p": X})
        assert "p" not in out.free_vars and "X" in out.free_vars
        assert Fn("f", (X,), (2,)) in set(_walk(out))

    def test_empty(self):
        e = parse("p*r + 1")
        assert substitute(e, {}) is e or substitute(e, {}) == e

    def test_r_binding(self):
        out = substitute(r, {"r": div(1, add(q, mul(-1, Q)))})
        assert out == parse("1/(q - Q)")

    def test_simultaneous(self):
        e = parse("p - r")
        assert substitute(e, {"p": r, "r": p}) == parse("r - p")

    @given(rational_functions(opaque=False), st.fractions(-5, 5, max_denominator=5))
    def test_commutes_with_evaluation(self, e, c):
        sigma = {"p": add(Var("x"), Const(c)), "r": mul(2, Var("y"))}
        pt = {"x": Fraction(1, 3), "y": Fraction(-2, 7), "z": Fraction(5), "p": Fraction(0), "r": Fraction(0)}
        moved = dict(pt, p=Fraction(1, 3) + c, r=Fraction(-4, 7))
        try:
            lhs = evaluate(substitute(e, sigma), pt)
            rhs = evaluate(e, moved)
        except SingularPointError:
            return
        assert lhs == rhs


class TestEvaluate:
    def test_quarter_square(self):
        assert evaluate(parse("p^2/4"), {"p": Fraction(2)}) == 1

    def test_singular(self):
        with pytest.raises(SingularPointError):
            evaluate(parse("1/(q - Q)"), {"q": Fraction(3), "Q": Fraction(3)})

    def test_unbound(self):
        with pytest.raises(UnboundSymbolError):
            evaluate(parse("p + r"), {"p": Fraction(1)})

    def test_opaque_instantiation(self):
        poly = Polynomial.from_dict(1, 3, {(3,): 1, (0,): 2})
        pt = Point({"p": Fraction(2)}, {"f": poly})
        assert evaluate(parse("f(p)"), pt) == 10
        assert evaluate(parse("f'''(p)"), pt) == 6

    def test_point_json_round_trip(self):
        poly = Polynomial.from_dict(2, 2, {(1, 1): 3, (0, 0): -1})
        pt = Point({"p": Fraction(-3, 7)}, {"G": poly})
        assert Point.from_json(pt.to_json()) == pt


class TestSimplify:
    def test_f_family_N(self):
        assert simplify(parse("2*f'''(p) + f''(p)*(-2*f'''(p)/f''(p))")) == Const(0)

    def test_adding_zero(self):
        assert simplify(parse("x + 0")) == Var("x")

    def test_cancel(self):
        assert simplify(parse("(p^2 - p^2)/r")) == Const(0)

    def test_common_factor(self):
        assert simplify(parse("(p^2 - 1)/(p - 1)")) == parse("p + 1")

    @given(rational_functions())
    def test_preserves_semantics(self, e):
        d = add(e, mul(-1, simplify(e)))
        assert is_zero(d, structural=False).zero
