from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import assume, given, strategies as st

from linearisable.derivmatch import (LinThreePoint, build_g_example, compute_K, consistency_oracle,
                                     derivmatch_run, propagate_linear, quadform_from_expr, solve_next,
                                     validate_quadform, verify_conservation)
from linearisable.errors import DomainError, SingularStep
from linearisable.orbit import Orbit
from linearisable.specs import CoeffSeq

F = Fraction


def orbit_of(values):
    return Orbit(("x",), [(F(v),) for v in values], start=0)


def test_constant_g_derived_quantities():
    ex = build_g_example(1, 0)
    assert (ex.z(3), ex.zeta(3), ex.zbar(3), ex.A(3), ex.B(3)) == (2, 2, 2, 2, -4)


def test_constant_g_quadratic_form_reduces():
    f = build_g_example(1, 0).f
    ref = quadform_from_expr("xb*xm/4 - x^2/4")
    for n in (1, 5):
        assert {k: v for k, v in f.at(n).items() if v} == {k: v for k, v in ref.at(n).items() if v}


def test_linear_g_shift_values():
    ex = build_g_example(CoeffSeq.parse("n + 1"), 0)
    assert ex.z(4) == 2 * 4 + 2 and ex.zeta(4) == 2 * 4 + 3


@pytest.mark.parametrize("g_text,a", [("1", 0), ("n + 1", 0), ("n + 1", 2), ("n^2 + 3", F(-1, 2))])
def test_expansion_matches_sympy(g_text, a):
    """The hand-expanded monomials agree with a symbolic expansion of the generating product."""
    ex = build_g_example(CoeffSeq.parse(g_text), a)
    xm, x, xb, n = sp.symbols("xm x xb n")
    g = sp.Lambda(n, sp.sympify(g_text.replace("^", "**")))
    for nn in (1, 2, 5):
        z = g(nn + 1) + g(nn - 1)
        zeta = g(nn + 1) + g(nn)
        zbar = g(nn + 2) + g(nn)
        aa = sp.Rational(a.numerator, a.denominator) if isinstance(a, Fraction) else a
        expr = sp.expand(((xb + x - aa) / zbar - x / zeta) * ((xm + x - aa) / z - x / zeta) - x ** 2 / zeta ** 2)
        poly = sp.Poly(expr, xm, x, xb)
        want = {m: F(int(c.p), int(c.q)) for m, c in zip(poly.monoms(), poly.coeffs())}
        got = {m: v for m, v in ex.f.at(nn).items() if v}
        assert got == want


def test_validate_quadform_accepts_g_example():
    assert validate_quadform(build_g_example(CoeffSeq.parse("n + 1"), 2).f) == []


def test_validate_quadform_rejects_square_in_xb():
    assert validate_quadform(quadform_from_expr("xb^2 + x")) != []


def test_constant_g_linear_form():
    lin = build_g_example(1, 0).lin
    assert lin.at(7) == (2, -4, 2, 0, 2, 4, 2, 0)


def test_solve_next_examples():
    f = build_g_example(1, 0).f
    assert solve_next(f, 0, F(1), F(2), 1) == 4
    assert solve_next(f, 3, F(1), F(2), 1) == 16
    with pytest.raises(SingularStep):
        solve_next(f, 0, F(0), F(2), 1)


def test_compute_K_examples():
    lin = build_g_example(1, 0).lin
    assert compute_K(lin, F(1), F(2), F(4), 3) == F(1, 9)
    xs = [F(2) ** k for k in range(12)]
    assert {compute_K(lin, xs[i - 1], xs[i], xs[i + 1], i) for i in range(1, 11)} == {F(1, 9)}
    assert compute_K(lin, F(1), F(1), F(1), 3) == 0


def test_compute_K_zero_denominator():
    lin = build_g_example(1, 0).lin
    with pytest.raises(DomainError):
        compute_K(lin, F(1), F(-1), F(1), 1)


def test_propagate_geometric_orbit():
    lin = build_g_example(1, 0).lin
    orb = propagate_linear(lin, F(1, 9), 1, 2, 20)
    assert orb.values() == [F(2) ** k for k in range(22)]


def test_conservation_on_geometric_orbit():
    f = build_g_example(1, 0).f
    res = verify_conservation(f, orbit_of([2 ** k for k in range(15)]), M=0)
    assert res.all_equal and res.values == [0]


def test_conservation_negative_control():
    f = build_g_example(1, 0).f
    xs = [2 ** k for k in range(15)]
    xs[7] += 1
    res = verify_conservation(f, orbit_of(xs))
    assert not res.all_equal and len(res.values) > 1


def test_variable_g_run_is_exact():
    ex = build_g_example(CoeffSeq.parse("n + 1"), 0)
    run = derivmatch_run(ex.f, ex.lin, F(3, 2), F(2, 3), F(5, 7), 30)
    assert len(run.orbit) == 32
    assert run.conservation.all_equal and run.conservation.values == [F(3, 2)]
    assert len(set(run.K_values)) == 1


@pytest.mark.parametrize("g_text,a", [("1", 0), ("n + 1", 2)])
def test_oracle_passes_worked_examples(g_text, a):
    ex = build_g_example(CoeffSeq.parse(g_text), a)
    res = consistency_oracle(ex.f, ex.lin, n=1, samples=20, seed=0)
    assert res.passed and res.samples == 20


def test_oracle_rejects_corrupted_linear_form():
    ex = build_g_example(CoeffSeq.parse("n + 1"), 2)
    bad = LinThreePoint(ex.lin.alpha, CoeffSeq.of(lambda n: ex.B(n) + 1), *(
        getattr(ex.lin, k) for k in ("gamma", "delta", "eps", "zeta", "eta", "theta")), a=ex.lin.a)
    res = consistency_oracle(ex.f, bad, n=1, samples=20, seed=0)
    assert not res.passed
    assert res.counterexample["K_n"] != res.counterexample["K_n+1"]


def test_vanishing_z_is_rejected():
    ex = build_g_example(CoeffSeq.parse("n - 3"), 0)  # z(3) = g(4) + g(2) = 0
    with pytest.raises(DomainError):
        ex.f.at(3)


def test_scaling_linear_form_changes_nothing():
    ex = build_g_example(CoeffSeq.parse("n + 1"), 0)
    lin2 = ex.lin.scaled(CoeffSeq.parse("n^2 + 1"))
    args = (F(1, 3), F(2), F(-5, 4))
    assert compute_K(ex.lin, *args, 2) == compute_K(lin2, *args, 2)
    K = compute_K(ex.lin, *args, 1)
    assert propagate_linear(ex.lin, K, 1, 2, 12).values() == propagate_linear(lin2, K, 1, 2, 12).values()


nonzero_small = st.builds(F, st.integers(-9, 9).filter(bool), st.integers(1, 9))


@given(st.lists(st.integers(0, 4), min_size=1, max_size=3), st.integers(-3, 3), nonzero_small,
       nonzero_small, st.builds(F, st.integers(-9, 9), st.integers(1, 9)))
def test_linear_orbit_conserves_M(g_coeffs, a, x0, x1, M):
    """K fixed by one nonlinear step keeps f = M exactly along the whole linear orbit."""
    g = CoeffSeq.of(lambda n: 1 + sum(c * n ** i for i, c in enumerate(g_coeffs)))  # positive on n >= 0
    ex = build_g_example(g, a)
    try:
        run = derivmatch_run(ex.f, ex.lin, M, x0, x1, 15)
    except (SingularStep, DomainError):
        assume(False)
    assert run.conservation.all_equal and run.conservation.values == [M]
    assert len(set(run.K_values)) == 1
