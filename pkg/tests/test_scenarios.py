import random
import warnings
from fractions import Fraction

import pytest

from oracles import p, r, same, to_sympy
from paracr import parse
from paracr.expr import mul
from paracr.identity import Status, all_zero
from paracr.invariants import classify
from paracr.jet import check_admissible
from paracr.scenarios import (
    CHART,
    DegenerateFunctionError,
    ExampleReport,
    SingularParameterWarning,
    apply_matrix,
    coordinate_map,
    f_family,
    final_coframe,
    flat_model,
    geodesic_residual,
    has_trump_shape,
    intermediate_coframe,
    pulled_back_coframe,
    rescaling_matrix,
    run_example_suite,
    singular_parameters,
)


def test_flat_model():
    sys = flat_model()
    assert sys.G == parse("p^2/4") and sys.H == parse("0")
    assert classify(sys).flat


def test_f_family_quartic():
    assert same(to_sympy(f_family("p^4").H), -2 * r**2 / p)


def test_f_family_quadratic_is_flat():
    rep = classify(f_family("p^2/4"))
    assert rep.flat


def test_f_family_opaque_admissible():
    assert check_admissible(f_family("f")).in_class


@pytest.mark.parametrize("f", ["p", "3", "2*p - 1"])
def test_degenerate_profile(f):
    with pytest.raises(DegenerateFunctionError):
        f_family(f)


def test_profile_must_depend_on_p_only():
    with pytest.raises(ValueError):
        f_family("p^3 + x")


def test_coordinate_map_shape():
    m = coordinate_map(parse("f(p)"))
    assert set(m) == {"x", "y", "z", "p", "r"}
    assert all(set(e.free_vars) <= set(CHART.coords) for e in m.values())


def test_rescaling_shape():
    R = rescaling_matrix(parse("f(p)"))
    assert has_trump_shape(R)
    R[1][3] = parse("1")
    assert not has_trump_shape(R)


@pytest.mark.parametrize("f", ["f(p)", "p^4", "p^3 + p"])
def test_pullback_matches_final_coframe(f):
    f = parse(f)
    pulled = pulled_back_coframe(f)
    for a, b in zip(pulled, intermediate_coframe(f)):
        assert (a - b).verdict().zero
    for a, b in zip(apply_matrix(rescaling_matrix(f), pulled), final_coframe(f)):
        assert (a - b).verdict().zero


def test_pullback_detects_wrong_rescaling():
    f = parse("f(p)")
    R = rescaling_matrix(f)
    R[2][1] = mul(-1, R[2][1])
    got = apply_matrix(R, pulled_back_coframe(f))
    assert not (got[2] - final_coframe(f)[2]).verdict().zero


def test_geodesic_quartic_random_constants():
    rng = random.Random(4)
    for _ in range(10):
        c = [Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(3)]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SingularParameterWarning)
            assert all_zero(geodesic_residual("p^4", *c)).zero
            # with c1 = 0 the connection terms vanish and the sign is invisible
            if c[0] != 0:
                assert not all_zero(geodesic_residual("p^4", *c, gamma_sign=-1)).zero


def test_geodesic_opaque_symbolic_constants():
    assert all_zero(geodesic_residual("f", "c1", "c2", "c3")).zero
    assert not all_zero(geodesic_residual("f", "c1", "c2", "c3", gamma_sign=-1)).zero


def test_singular_parameter_warning():
    assert singular_parameters(parse("p^4")) == [0]
    with pytest.warns(SingularParameterWarning):
        geodesic_residual("p^4")
    assert singular_parameters(parse("p^3/6 + p")) == [0]
    assert singular_parameters(parse("p^4 + 6*p^2")) == []


@pytest.mark.parametrize("f", ["f", "p^4", "p^3", "p^5 + p^3"])
def test_example_suite(f):
    rep = run_example_suite(f)
    assert rep.passed
    assert ExampleReport.from_json(rep.to_json()).to_json() == rep.to_json()


def test_example_suite_quadratic_W_zero():
    rep = run_example_suite("p^2/4")
    assert rep.passed and rep.wunschmann.status is Status.STRUCTURAL


def test_wunschmann_quartic_nonzero():
    assert not run_example_suite("p^4").wunschmann.zero
