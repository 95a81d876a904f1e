"""The acceptance battery: ten criteria, each split into named checks.

``run_all()`` is what ``linearisable suite`` and the acceptance tests call.
Results are cached per process, so the test suite runs each check once.
"""
from __future__ import annotations

import functools
import io
import math
from contextlib import redirect_stderr, redirect_stdout
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import cascade as casc
from . import confinement as conf
from . import degree
from . import derivmatch as dm
from . import ode
from .algebra import RatFun, UniPoly
from .errors import ConstraintViolated
from .rk import RKConfig
from .runners import mapping_for, probe_config_from, random_matrix
from .specs import load_spec

CORPUS = Path(__file__).resolve().parents[2] / "corpus"
if not CORPUS.is_dir():  # installed without the repository checkout
    CORPUS = Path.cwd() / "corpus"

CASCADE_FIXTURES = ("gambier", "gambier_tuned", "gambier_polynomial", "cascade_three")
LINEAR_FIXTURES = ("gambier", "gambier_polynomial", "cascade_three")
QUADFORM_FIXTURES = ("quadform_gconst", "quadform_gvar")

# checks whose failure is understood and recorded in the decisions ledger
KNOWN_FAILURES = {
    "2/cascade_three linear": "x2's coefficients depend on x1, whose degree grows; degrees are triangular numbers",
    "4/quadform_gvar not confined": "the loss-of-freedom site recovers after two steps for g(n) = n + 1 as well",
}


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [c.name for c in self.checks if not c.passed]
        tail = f" (failed: {', '.join(failed)})" if failed else ""
        return f"[{status}] criterion {self.number}: {self.title}{tail}"

    def to_json(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks]}


def corpus(name: str):
    return load_spec(CORPUS / f"{name}.spec")


def _check(results, name, passed, detail=""):
    results.append(Check(name, bool(passed), detail))


# ---------------------------------------------------------------------------

def criterion_1() -> CriterionResult:
    r = CriterionResult(1, "projective three-point map has constant degree (exact, n <= 15, two seeds)")
    spec = mapping_for(corpus("three_point_projective"))
    for seed in (0, 1):
        seq = degree.degree_sequence(spec, 15, degree.EXACT, seed)
        cls = degree.classify_growth(seq)
        _check(r.checks, f"seed {seed} constant", cls.kind == "Constant", f"{cls}: {seq.degrees}")
    return r


def criterion_2() -> CriterionResult:
    r = CriterionResult(2, "homographic cascades have linear degree growth (exact, n <= 12)")
    for name in LINEAR_FIXTURES:
        seq = degree.degree_sequence(mapping_for(corpus(name)), 12, degree.EXACT, 0)
        cls = degree.classify_growth(seq)
        _check(r.checks, f"{name} linear", cls.kind == "Linear", f"{cls}: {seq.degrees}")
    return r


def criterion_3() -> CriterionResult:
    r = CriterionResult(3, "generic quadratic map grows exponentially; modular degrees equal exact ones")
    spec = mapping_for(corpus("quadratic_generic"))
    ex = degree.degree_sequence(spec, 10, degree.EXACT, 0)
    cls = degree.classify_growth(ex)
    _check(r.checks, "exact n <= 10 exponential", cls.kind == "Exponential", f"{cls}: {ex.degrees}")
    mod = degree.degree_sequence(spec, 12, degree.MODULAR, 0)
    mcls = degree.classify_growth(mod)
    _check(r.checks, "modular n <= 12 exponential", mcls.kind == "Exponential", f"{mcls}: {mod.degrees}")
    for name, n in (("three_point_projective", 15),) + tuple((f, 12) for f in LINEAR_FIXTURES):
        sp = mapping_for(corpus(name))
        for seed in (0, 1):
            a = degree.degree_sequence(sp, n, degree.EXACT, seed).degrees
            b = degree.degree_sequence(sp, n, degree.MODULAR, seed).degrees
            _check(r.checks, f"{name} seed {seed} modular = exact", a == b, f"exact {a} modular {b}")
    return r


def criterion_4() -> CriterionResult:
    r = CriterionResult(4, "confinement verdicts")

    def probe(name):
        sf = corpus(name)
        spec = mapping_for(sf, probe=True)
        cfg = probe_config_from(sf)
        site = conf.parse_site(sf.probe["site"], spec, cfg.seed, cfg.n0)
        return conf.probe_confinement(spec, site, cfg)

    rep = probe("three_point_projective")
    _check(r.checks, "three_point_projective w=0 confined at 1", str(rep.status) == "ConfinedAt(1)", str(rep.status))
    rep = probe("gambier")
    _check(r.checks, "gambier not confined", str(rep.status) == "NotConfinedWithin(16)", str(rep.status))
    rep = probe("quadform_gvar")
    _check(r.checks, "quadform_gvar not confined", str(rep.status) == "NotConfinedWithin(16)", str(rep.status))
    rep = probe("quadform_gconst")
    _check(r.checks, "quadform_gconst confined", rep.status.kind == "ConfinedAt", str(rep.status))
    return r


def criterion_5() -> CriterionResult:
    r = CriterionResult(5, "linearised cascade orbits equal direct iteration for 50 steps")
    for name in CASCADE_FIXTURES:
        cmp = casc.compare_cascade(mapping_for(corpus(name)), None, 50, 0)
        infs = sum(v is None for row in cmp.direct.steps for v in row)
        _check(r.checks, f"{name} identical", cmp.identical and len(cmp.direct) == 51,
               f"first mismatch {cmp.first_mismatch}, infinity markers {infs}")
    spec = mapping_for(corpus("three_point_projective"))
    w0, w1 = Fraction(2, 3), Fraction(5, 7)
    lin = casc.linearised_three_point(spec, w0, w1, 50, 0)
    direct = casc.direct_three_point(spec, w0, w1, 50, 0)
    _check(r.checks, "three_point_projective companion lift", lin == direct, f"{len(direct)} direct values")
    return r


def criterion_6() -> CriterionResult:
    r = CriterionResult(6, "discrete derivative matching")
    for name in QUADFORM_FIXTURES:
        sf = corpus(name)
        ex, M, x0, x1, N = dm.g_example_from_section(sf.derivmatch)
        orc = dm.consistency_oracle(ex.f, ex.lin, samples=20, seed=0)
        _check(r.checks, f"{name} oracle", orc.passed and orc.samples == 20,
               f"{orc.samples} samples, {orc.resampled} resampled")
        run = dm.derivmatch_run(ex.f, ex.lin, M, x0, x1, 30)
        cons = run.conservation
        _check(r.checks, f"{name} conservation", cons.all_equal and cons.values == [M] and len(run.orbit) == 32,
               f"values {[str(v) for v in cons.values]}")
        _check(r.checks, f"{name} K constant", len(set(run.K_values)) == 1, f"K = {run.K}")
    ex = dm.build_g_example(1, 0, 0)
    run = dm.derivmatch_run(ex.f, ex.lin, 0, 1, 2, 30)
    xs = run.orbit.values()
    _check(r.checks, "g=1 geometric orbit", xs == [Fraction(2) ** k for k in range(32)], f"{[str(v) for v in xs[:5]]}")
    _check(r.checks, "g=1 K = 1/9", run.K == Fraction(1, 9), f"K = {run.K}")
    return r


def criterion_7() -> CriterionResult:
    r = CriterionResult(7, "Hamiltonian invariants conserved; drift shrinks with tolerance")
    sect = corpus("hamiltonian").ode
    cfg = ode.rk_config_from(sect)
    ic = ode.random_hh_state(int(sect.get("seed", 0)), 0.5)
    dH, dC = ode.invariant_drift(ode.hamiltonian_flow(ic, cfg.with_tol(1e-10)))
    _check(r.checks, "drift <= 1e-8 at tol 1e-10", dH <= 1e-8 and dC <= 1e-8, f"dH={dH:.3e} dC={dC:.3e}")
    tH, tC = ode.invariant_drift(ode.hamiltonian_flow(ic, cfg.with_tol(1e-12)))
    _check(r.checks, "tol/100 improves both >= 10x", dH >= 10 * tH and dC >= 10 * tC,
           f"H x{dH / max(tH, 1e-300):.1f} C x{dC / max(tC, 1e-300):.1f}")
    return r


def criterion_8() -> CriterionResult:
    r = CriterionResult(8, "Riccati chains and projective consistency")
    for name in ("riccati_gambier", "riccati_three_stage"):
        sect = corpus(name).ode
        chain, ic = ode.chain_from_section(sect)
        res = ode.compare_chain(chain, ic, ode.rk_config_from(sect))
        _check(r.checks, f"{name} direct = linearised", res["max_difference"] <= 1e-6,
               f"max diff {res['max_difference']:.3e} on [{sect.get('t0')}, {res['t_common']}]")
    sect = corpus("projective_tanh").ode
    res = ode.projective_consistency(ode.matrix_from_text(sect["A"]), ode._floats(sect["ic"]),
                                     ode.rk_config_from(sect))
    _check(r.checks, "tanh residual", res["residual"] <= 1e-6, f"{res['residual']:.3e}")
    sect = corpus("projective_random").ode
    res = ode.projective_consistency(random_matrix(int(sect.get("seed", 0))), ode._floats(sect["ic"]),
                                     ode.rk_config_from(sect))
    _check(r.checks, "random matrix residual", res["residual"] <= 1e-6, f"{res['residual']:.3e}")
    return r


def criterion_9() -> CriterionResult:
    from .runners import chazy_points

    r = CriterionResult(9, "Chazy XII family and continuous derivative matching")
    sect = corpus("chazy_t4").ode
    inst = ode.chazy_instance(ode.parse_poly(sect["u"]))
    _check(r.checks, "u = t^4 valid", True, "constraint polynomial vanishes")
    try:
        ode.chazy_instance(ode.parse_poly("t^4 + 1"))
        _check(r.checks, "u = t^4 + 1 rejected", False, "accepted")
    except ConstraintViolated as exc:
        _check(r.checks, "u = t^4 + 1 rejected", True, str(exc.coefficients))
    pts = chazy_points(inst, 20, 0)
    res = [ode.chazy_residual(inst, t) for t in pts]
    _check(r.checks, "residual 0 at 20 points", len(set(pts)) == 20 and all(v == 0 for v in res), "")
    t0, x0, xp0 = ode._floats(sect["ic"])
    sol = ode.deriv_match_solve(inst.a, inst.b, float(sect["M"]), (t0, x0, xp0), float(sect["t1"]),
                                ode.rk_config_from(sect))
    _check(r.checks, "drift <= 1e-6", sol.drift <= 1e-6, f"K={sol.K:.12g} drift={sol.drift:.3e}")
    zero = RatFun(UniPoly([]))
    M = 2.0
    free = ode.deriv_match_solve(zero, zero, M, (1.0, 0.0, 2.0), 3.0, RKConfig(rtol=1e-10, atol=1e-10))
    err = max(abs(x - ode.free_closed_form(t, 1.0, 0.0, 2.0, M))
              for t, (x, _) in zip(free.trajectory.times, free.trajectory.states))
    c = 2.0 / math.sqrt(1.0 - free.K)  # x' = c sqrt(t - K)
    _check(r.checks, "a = b = 0 closed form", err <= 1e-8 and abs(c * c / 2 - M) <= 1e-8 and free.drift <= 1e-8,
           f"max error {err:.3e}, drift {free.drift:.3e}")
    return r


def _designated_runs():
    runs = [("degree-growth", "three_point_projective", ["--n-max", "15"]),
            ("degree-growth", "quadratic_generic", ["--n-max", "10"]),
            ("confine", "three_point_projective", []),
            ("confine", "square_ratio", []),
            ("confine", "quadform_gvar", [])]
    runs += [("cascade", f, []) for f in CASCADE_FIXTURES]
    runs += [("derivmatch", f, []) for f in QUADFORM_FIXTURES + ("quadform_gvar_a2",)]
    runs += [("ode", f, []) for f in ("hamiltonian", "riccati_gambier", "riccati_three_stage",
                                      "projective_tanh", "projective_random", "chazy_t4")]
    return runs


def criterion_10() -> CriterionResult:
    from .cli import main

    r = CriterionResult(10, "byte-identical JSON reports on rerun")
    for sub, fixture, extra in _designated_runs():
        outs = []
        for _ in range(2):
            buf, err = io.StringIO(), io.StringIO()
            with redirect_stdout(buf), redirect_stderr(err):
                code = main([sub, "--spec", str(CORPUS / f"{fixture}.spec"), "--seed", "0"] + extra)
            outs.append((code, buf.getvalue().encode("utf-8")))
        same = outs[0] == outs[1] and outs[0][0] in (0, 1) and len(outs[0][1]) > 0
        _check(r.checks, f"{sub} {fixture}", same, f"exit {outs[0][0]}, {len(outs[0][1])} bytes")
    return r


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10)


@functools.lru_cache(maxsize=None)
def result(number: int) -> CriterionResult:
    return CRITERIA[number - 1]()


def run_all() -> list[CriterionResult]:
    return [result(k) for k in range(1, len(CRITERIA) + 1)]
