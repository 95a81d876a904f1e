import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import assume, given, settings, strategies as st
from scipy.integrate import solve_ivp

from linearisable.algebra import RatFun, UniPoly
from linearisable.errors import ConstraintViolated, DomainError, LinearisationUnavailable, SpecError
from linearisable.ode import (ODESystem, RiccatiChain, chain_from_section, chazy_instance, chazy_residual,
                              compare_chain, deriv_match_solve, free_closed_form, hamiltonian_flow,
                              invariant_drift, parse_poly, projective_consistency, random_hh_state,
                              riccati_chain_integrate)
from linearisable.rk import RKConfig, integrate
from linearisable.runners import random_matrix
from linearisable.specs import load_spec

F = Fraction
t = UniPoly.var()


# -- integrator ---------------------------------------------------------------

def test_exponential_to_ten_tolerances():
    tol = 1e-10
    tr = integrate(lambda s, y: y, [1.0], RKConfig(0, 1, tol, tol))
    assert tr.complete
    assert abs(tr.states[-1, 0] - math.e) <= 10 * tol * math.e


def test_movable_pole_flags_blowup():
    tr = integrate(lambda s, y: y * y, [1.0], RKConfig(0, 2))
    assert not tr.complete
    assert tr.blowup == pytest.approx(1.0, abs=1e-3)
    assert np.all(np.isfinite(tr.states))


def test_harmonic_oscillator_energy_over_ten_periods():
    tr = integrate(lambda s, y: np.array([y[1], -y[0]]), [1.0, 0.0],
                   RKConfig(0, 20 * math.pi, 1e-10, 1e-10, samples=2001))
    energy = 0.5 * (tr.states[:, 0] ** 2 + tr.states[:, 1] ** 2)
    assert np.max(np.abs(energy - 0.5)) / 0.5 <= 1e-8


def test_backward_integration():
    tr = integrate(lambda s, y: y, [1.0], RKConfig(0, -1))
    assert tr.states[-1, 0] == pytest.approx(math.exp(-1), rel=1e-9)


def test_dense_output_and_derivative():
    tr = integrate(lambda s, y: np.array([math.cos(s)]), [0.0], RKConfig(0, 3))
    for s in np.linspace(0, 3, 37):
        assert tr.dense(s)[0] == pytest.approx(math.sin(s), abs=1e-8)
        assert tr.dense.derivative(s)[0] == pytest.approx(math.cos(s), abs=1e-7)
    with pytest.raises(DomainError):
        tr.dense(3.5)


def test_matches_scipy_rk45():
    """Independent implementation of the same pair: same answer to well inside the tolerance."""
    f = lambda s, y: np.array([y[1], -math.sin(y[0]) + 0.1 * math.cos(s)])
    ours = integrate(f, [0.3, 0.0], RKConfig(0, 5, 1e-11, 1e-11))
    ref = solve_ivp(f, (0, 5), [0.3, 0.0], method="RK45", rtol=1e-11, atol=1e-11, dense_output=True)
    for s, y in zip(ours.times, ours.states):
        assert np.max(np.abs(ref.sol(s) - y)) < 1e-8


def test_config_validation():
    with pytest.raises(DomainError):
        RKConfig(0, 0)
    with pytest.raises(DomainError):
        RKConfig(0, 1, rtol=0)


def test_ode_system_from_text():
    sys_ = ODESystem.parse(["x", "v"], ["v", "-k*x"], {"k": 4})
    tr = sys_.solve([1.0, 0.0], RKConfig(0, 1))
    assert tr.states[-1, 0] == pytest.approx(math.cos(2), abs=1e-8)
    with pytest.raises(SpecError):
        ODESystem.parse(["x"], ["y"])


# -- Hamiltonian with a second invariant ----------------------------------------

def test_fixed_point_has_zero_drift():
    tr = hamiltonian_flow((0.0, 0.0, 0.0, 0.0), RKConfig(0, 2))
    assert invariant_drift(tr) == (0.0, 0.0)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_random_state_conserves_both_invariants(seed):
    tr = hamiltonian_flow(random_hh_state(seed, 0.5), RKConfig(0, 2, 1e-10, 1e-10))
    dH, dC = invariant_drift(tr)
    assert tr.complete and dH <= 1e-8 and dC <= 1e-8


def test_drift_shrinks_with_tolerance():
    ic = random_hh_state(0, 0.5)
    loose = invariant_drift(hamiltonian_flow(ic, RKConfig(0, 2, 1e-6, 1e-6)))
    tight = invariant_drift(hamiltonian_flow(ic, RKConfig(0, 2, 1e-8, 1e-8)))
    assert tight[0] * 10 <= loose[0] and tight[1] * 10 <= loose[1]


def test_second_invariant_is_first_integral():
    """Poisson bracket {H, C} vanishes identically (symbolic oracle)."""
    x, y, px, py = sp.symbols("x y px py")
    H = (px ** 2 + py ** 2) / 2 + y ** 5 + y ** 3 * x ** 2 + sp.Rational(3, 16) * y * x ** 4
    C = -y * px ** 2 + x * px * py + y ** 4 * x ** 2 / 2 + sp.Rational(3, 8) * y ** 2 * x ** 4 + x ** 6 / 32
    br = sum(sp.diff(H, q) * sp.diff(C, p) - sp.diff(H, p) * sp.diff(C, q) for q, p in ((x, px), (y, py)))
    assert sp.expand(br) == 0


# -- Riccati chains -----------------------------------------------------------

def test_single_riccati_closed_form():
    chain = RiccatiChain.parse([("x", "-1", "0", "0")])
    cfg = RKConfig(0, 2)
    for method in ("direct", "linearised"):
        res = riccati_chain_integrate(chain, [1.0], cfg, method)
        for s in np.linspace(0, 2, 21):
            assert res.at(s)[0] == pytest.approx(1 / (1 + s), abs=1e-8)


@pytest.mark.parametrize("name", ["riccati_gambier", "riccati_three_stage"])
def test_corpus_chains_agree(corpus_path, name):
    sect = load_spec(corpus_path(name)).ode
    chain, ic = chain_from_section(sect)
    res = compare_chain(chain, ic, RKConfig(0, float(sect["t1"]), 1e-10, 1e-10))
    assert res["max_difference"] <= 1e-6
    assert res["t_common"] == pytest.approx(float(sect["t1"]))


def test_chain_rejects_later_stage_reference():
    with pytest.raises(SpecError):
        RiccatiChain.parse([("x", "y", "0", "1"), ("y", "-1", "0", "0")])


def test_vanishing_leading_coefficient_unavailable():
    chain = RiccatiChain.parse([("x", "t - 1/2", "0", "1")])
    with pytest.raises(LinearisationUnavailable):
        riccati_chain_integrate(chain, [0.0], RKConfig(0, 1), "linearised")
    chain = RiccatiChain.parse([("x", "0", "1", "0")])
    with pytest.raises(LinearisationUnavailable):
        riccati_chain_integrate(chain, [1.0], RKConfig(0, 1), "linearised")


def test_movable_pole_restricts_common_domain():
    chain = RiccatiChain.parse([("x", "1", "0", "0")])  # x = 1/(1 - t)
    res = compare_chain(chain, [1.0], RKConfig(0, 2))
    assert res["t_common"] < 1.0
    assert res["direct_blowup"] is not None and res["linearised_blowup"] is not None


# -- projective consistency ---------------------------------------------------

def test_identity_matrix_constant_ratio():
    res = projective_consistency([[1, 0], [0, 1]], [1.0, 0.3], RKConfig(0, 1))
    assert res["residual"] <= 1e-8


def test_swap_matrix_gives_tanh():
    res = projective_consistency([[0, 1], [1, 0]], [1.0, 0.0], RKConfig(0, 2))
    assert res["residual"] <= 1e-6 and not res["shortened"]


def test_random_matrix_residual_scales_with_tolerance():
    A = random_matrix(0)
    r = [projective_consistency(A, [1.0, 0.3], RKConfig(0, 1, tol, tol))["residual"] for tol in (1e-6, 1e-9)]
    assert r[1] <= 1e-6
    assert r[1] < r[0] / 10


def test_zero_crossing_shortens_interval():
    res = projective_consistency([[0, 1], [-1, 0]], [1.0, 0.0], RKConfig(0, 3))  # X0 = cos t
    assert res["shortened"] and res["t_end"] < math.pi / 2


# -- Chazy XII instances ------------------------------------------------------

def test_quartic_monomial_instance():
    inst = chazy_instance(t ** 4)
    assert inst.a == RatFun(UniPoly([F(-2)]), t)
    assert inst.b == RatFun(UniPoly([F(3)]), t * t)
    assert chazy_residual(inst, 1) == 0


def test_constant_instance():
    inst = chazy_instance(UniPoly([F(1)]))
    assert inst.a.num.is_zero() and inst.b.num.is_zero()
    assert all(chazy_residual(inst, s) == 0 for s in (F(-3), F(1, 2), F(7)))


def test_constraint_violation_reports_coefficients():
    with pytest.raises(ConstraintViolated) as exc:
        chazy_instance(t ** 4 + UniPoly([F(1)]))
    assert exc.value.coefficients == {0: "24/1"}


def test_corrupted_coefficient_is_detected():
    inst = chazy_instance(t ** 4)
    assert chazy_residual(inst, 1, (6, 8, 16, 4)) != 0


@pytest.mark.parametrize("u_text", ["(t + 1)^2*(t - 3)^2", "t^2", "(t^2 + 1)^2"])
def test_constraint_rejects(u_text):
    with pytest.raises(ConstraintViolated):
        chazy_instance(parse_poly(u_text))


@pytest.mark.parametrize("u_text", ["t^4", "(t - 2)^4", "(t - 1)^3*(t + 2)", "t^3", "1 + 3*t"])
def test_residual_matches_sympy(u_text):
    """For admissible u, sympy's own differentiation gives an identically zero residual."""
    inst = chazy_instance(parse_poly(u_text))
    s = sp.symbols("t")
    a = -sp.diff(sp.sympify(u_text.replace("^", "**")), s) / (2 * sp.sympify(u_text.replace("^", "**")))
    expr = sp.diff(a, s, 3) - (6 * sp.diff(a, s, 2) * a + 7 * sp.diff(a, s) ** 2
                               - 16 * sp.diff(a, s) * a ** 2 + 4 * a ** 4)
    assert sp.simplify(expr) == 0
    for q in (F(5, 3), F(-7, 2), F(11)):
        assert chazy_residual(inst, q) == 0


def test_residual_at_pole_is_domain_error():
    with pytest.raises(DomainError):
        chazy_residual(chazy_instance(t ** 4), 0)


# -- continuous derivative matching -------------------------------------------

zero = RatFun(UniPoly([]), UniPoly([F(1)]))


def test_free_case_closed_form():
    sol = deriv_match_solve(zero, zero, 2.0, (1.0, 1.0, 2.0), 3.0)
    assert sol.K == pytest.approx(0.0, abs=1e-12)
    assert sol.drift <= 1e-8
    for s, (x, _) in zip(sol.trajectory.times, sol.trajectory.states):
        assert x == pytest.approx(free_closed_form(s, 1.0, 1.0, 2.0, 2.0), abs=1e-8)


def test_quartic_pair_conserves_M():
    inst = chazy_instance(t ** 4)
    sol = deriv_match_solve(inst.a, inst.b, 1.0, (1.0, 1.0, 1.0), 3.0)
    assert sol.K == pytest.approx(5 / 6) and sol.xpp0 == pytest.approx(2.0)
    assert sol.drift <= 1e-6


def test_M_drift_shrinks_with_tolerance():
    inst = chazy_instance(t ** 4)
    d = [deriv_match_solve(inst.a, inst.b, 1.0, (1.0, 1.0, 1.0), 3.0, RKConfig(rtol=tol, atol=tol)).drift
         for tol in (1e-6, 1e-8)]
    assert d[1] * 10 <= d[0]


def test_zero_slope_is_singular():
    with pytest.raises(DomainError):
        deriv_match_solve(zero, zero, 1.0, (0.0, 1.0, 0.0), 1.0)


def test_interval_touching_K_rejected():
    # free case: K = t0 - x0'^2/(2M) = 1 - 1/2
    with pytest.raises(DomainError, match="K"):
        deriv_match_solve(zero, zero, 1.0, (1.0, 0.0, 1.0), 0.0)


def test_interval_near_pole_rejected():
    inst = chazy_instance(t ** 4)
    with pytest.raises(DomainError, match="pole"):
        deriv_match_solve(inst.a, inst.b, 1.0, (1.0, 1.0, 1.0), 0.05)


@settings(max_examples=20)
@given(st.floats(0.5, 3.0), st.floats(0.2, 2.0), st.floats(-2.0, 2.0))
def test_free_case_matches_closed_form(M, xp0, x0):
    assume(1.0 - xp0 ** 2 / (2 * M) < 0.85)
    sol = deriv_match_solve(zero, zero, M, (1.0, x0, xp0), 2.0)
    assert sol.K == pytest.approx(1.0 - xp0 ** 2 / (2 * M))
    end = sol.trajectory.states[-1, 0]
    assert end == pytest.approx(free_closed_form(2.0, 1.0, x0, xp0, M), abs=1e-7)
