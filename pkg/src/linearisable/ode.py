"""Continuous systems: invariant conservation, Riccati cascades, projective
consistency, the Chazy XII coefficient family and the continuous derivative
matching procedure.

Floats live here; the exact layer (Chazy instances) uses ``RatFun`` only.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .algebra import RatFun, UniPoly, fraction_str, rational_roots
from .errors import ConstraintViolated, DomainError, LinearisationUnavailable, SpecError
from .expr import diff, float_expr, free_symbols, parse_expr
from .rk import RKConfig, Trajectory, integrate
from .specs import parse_rational


# ---------------------------------------------------------------------------
# generic expression systems
# ---------------------------------------------------------------------------

@dataclass
class ODESystem:
    names: tuple
    rhs: tuple  # one Expr per state variable
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        allowed = set(self.names) | {"t"} | set(self.params)
        for name, e in zip(self.names, self.rhs):
            extra = free_symbols(e) - allowed
            if extra:
                raise SpecError(f"right-hand side of {name!r} uses undeclared symbols {sorted(extra)}")
        self._fns = [float_expr(e) for e in self.rhs]

    @classmethod
    def parse(cls, names: Sequence[str], rhs: Sequence[str], params=None) -> "ODESystem":
        params = dict(params or {})
        syms = list(names) + ["t"] + list(params)
        return cls(tuple(names), tuple(parse_expr(r, syms) for r in rhs),
                   {k: float(v) for k, v in params.items()})

    def __call__(self, t, y):
        env = dict(self.params)
        env["t"] = t
        env.update(zip(self.names, y))
        return np.array([f(env) for f in self._fns])

    def solve(self, ic, cfg: RKConfig) -> Trajectory:
        return integrate(self, ic, cfg)


# ---------------------------------------------------------------------------
# Hamiltonian with a second invariant
# ---------------------------------------------------------------------------

HH_NAMES = ("x", "y", "px", "py")


def hh_rhs(t, s):
    x, y, px, py = s
    return np.array([px, py,
                     -(2 * y ** 3 * x + 0.75 * y * x ** 3),
                     -(5 * y ** 4 + 3 * y ** 2 * x ** 2 + (3 / 16) * x ** 4)])


def hh_energy(s):
    x, y, px, py = s
    return 0.5 * px ** 2 + 0.5 * py ** 2 + y ** 5 + y ** 3 * x ** 2 + (3 / 16) * y * x ** 4


def hh_second_invariant(s):
    x, y, px, py = s
    return -y * px ** 2 + x * px * py + 0.5 * y ** 4 * x ** 2 + 0.375 * y ** 2 * x ** 4 + x ** 6 / 32


def random_hh_state(seed: int = 0, bound: float = 0.5) -> tuple:
    rng = random.Random(seed)
    return tuple(rng.uniform(-bound, bound) for _ in range(4))


def hamiltonian_flow(ic, cfg: RKConfig) -> Trajectory:
    return integrate(hh_rhs, ic, cfg)


def relative_drift(values) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.max(np.abs(values - values[0])) / max(1.0, abs(values[0])))


def invariant_drift(traj: Trajectory) -> tuple[float, float]:
    """(max relative drift of H, of C) over the samples."""
    H = [hh_energy(s) for s in traj.states]
    C = [hh_second_invariant(s) for s in traj.states]
    return relative_drift(H), relative_drift(C)


# ---------------------------------------------------------------------------
# Riccati cascades
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RiccatiStage:
    var: str
    a: object  # Expr in earlier variables and t
    b: object
    c: object


@dataclass
class RiccatiChain:
    """x_mu' = a_mu x_mu^2 + b_mu x_mu + c_mu, coefficients in earlier stages and t."""

    stages: tuple
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        seen = []
        for st in self.stages:
            allowed = set(seen) | {"t"} | set(self.params)
            for part in (st.a, st.b, st.c):
                extra = free_symbols(part) - allowed
                if extra:
                    raise SpecError(f"stage {st.var!r} coefficient uses {sorted(extra)}; "
                                    "only earlier stages, t and parameters are allowed")
            seen.append(st.var)
        self._coef = [tuple(float_expr(p) for p in (st.a, st.b, st.c)) for st in self.stages]
        # total time derivative of a_mu needs its partials in t and earlier stages
        self._da = []
        for k, st in enumerate(self.stages):
            parts = {"t": float_expr(diff(st.a, "t"))}
            for prev in self.stages[:k]:
                parts[prev.var] = float_expr(diff(st.a, prev.var))
            self._da.append(parts)

    @property
    def names(self) -> tuple:
        return tuple(s.var for s in self.stages)

    @classmethod
    def parse(cls, spec: Sequence[tuple[str, str, str, str]], params=None) -> "RiccatiChain":
        params = {k: float(v) for k, v in (params or {}).items()}
        stages, seen = [], []
        for var, a, b, c in spec:
            syms = seen + ["t"] + list(params)
            stages.append(RiccatiStage(var, *(parse_expr(e, syms) for e in (a, b, c))))
            seen.append(var)
        return cls(tuple(stages), params)

    def _env(self, t, values):
        env = dict(self.params)
        env["t"] = t
        env.update(values)
        return env

    def coefficients(self, k, env):
        return tuple(f(env) for f in self._coef[k])

    def rhs(self, t, y):
        env = self._env(t, zip(self.names, y))
        out = []
        for k, v in enumerate(self.names):
            a, b, c = self.coefficients(k, env)
            x = env[v]
            out.append(a * x * x + b * x + c)
        return np.array(out)

    def a_prime(self, k, env, earlier_rates):
        total = self._da[k]["t"](env)
        for name, rate in earlier_rates.items():
            total += self._da[k][name](env) * rate
        return total


@dataclass
class ChainResult:
    names: tuple
    method: str
    times: np.ndarray
    states: np.ndarray
    blowup: float | None
    stats: dict
    evaluate: object = None  # t -> state, from the dense interpolants

    def at(self, t):
        return np.asarray(self.evaluate(t), dtype=float)

    def to_json(self) -> dict:
        return {"names": list(self.names), "method": self.method, "blowup": self.blowup,
                "times": [float(t) for t in self.times],
                "states": [[float(v) for v in row] for row in self.states], "stats": self.stats}


def _chain_direct(chain: RiccatiChain, ic, cfg) -> ChainResult:
    tr = integrate(chain.rhs, ic, cfg)
    return ChainResult(chain.names, "direct", tr.times, tr.states, tr.blowup,
                       {"accepted": tr.n_accepted, "rejected": tr.n_rejected}, tr.dense)


def _chain_linearised(chain: RiccatiChain, ic, cfg) -> ChainResult:
    """Stage by stage: x = -w'/(a w) with w'' = (a'/a + b) w' - a c w."""
    earlier = []  # (name, dense solution of (w, w'), stage index)
    t_end = cfg.t1
    blowup = None
    accepted = rejected = 0

    def earlier_values(t):
        vals, rates = {}, {}
        for name, sol, k in earlier:
            w, dw = sol(t)
            env = chain._env(t, vals)
            a, b, c = chain.coefficients(k, env)
            x = -dw / (a * w)
            vals[name] = x
            rates[name] = a * x * x + b * x + c
        return vals, rates

    for k, st in enumerate(chain.stages):
        def rhs(t, s, k=k):
            vals, rates = earlier_values(t)
            env = chain._env(t, vals)
            a, b, c = chain.coefficients(k, env)
            if a == 0:
                raise LinearisationUnavailable(st.var)
            da = chain.a_prime(k, env, rates)
            w, dw = s
            return np.array([dw, (da / a + b) * dw - a * c * w])

        a_samples = np.array([chain.coefficients(k, chain._env(t, earlier_values(t)[0]))[0]
                              for t in np.linspace(cfg.t0, t_end, cfg.samples)])
        if np.any(a_samples == 0) or np.any(np.sign(a_samples[1:]) != np.sign(a_samples[:-1])):
            raise LinearisationUnavailable(st.var)
        a0 = a_samples[0]
        try:
            tr = integrate(rhs, [1.0, -a0 * ic[k]], cfg.on(cfg.t0, t_end))
        except ZeroDivisionError:
            raise LinearisationUnavailable(st.var) from None
        accepted += tr.n_accepted
        rejected += tr.n_rejected
        # a zero of w is a movable pole of x; stop before it
        w = tr.states[:, 0]
        sign_change = np.nonzero(np.sign(w[1:]) != np.sign(w[:-1]))[0]
        reach = tr.dense.t_end
        if sign_change.size:
            reach = tr.times[sign_change[0]]
        if tr.blowup is not None or sign_change.size:
            blowup = reach if blowup is None else min(blowup, reach, key=lambda v: abs(v - cfg.t0))
            t_end = reach
        earlier.append((st.var, tr.dense, k))
    times = np.linspace(cfg.t0, t_end, cfg.samples)
    states = []
    for t in times:
        vals, _ = earlier_values(t)
        states.append([vals[n] for n in chain.names])

    def evaluate(t):
        vals, _ = earlier_values(t)
        return [vals[n] for n in chain.names]

    return ChainResult(chain.names, "linearised", times, np.array(states), blowup,
                       {"accepted": accepted, "rejected": rejected}, evaluate)


def riccati_chain_integrate(chain: RiccatiChain, ic, cfg: RKConfig, method: str = "direct") -> ChainResult:
    if method == "direct":
        return _chain_direct(chain, ic, cfg)
    if method == "linearised":
        return _chain_linearised(chain, ic, cfg)
    raise DomainError(f"unknown method {method!r}")


def compare_chain(chain: RiccatiChain, ic, cfg: RKConfig) -> dict:
    """Max pointwise difference of the two methods on their common domain."""
    d = riccati_chain_integrate(chain, ic, cfg, "direct")
    lin = riccati_chain_integrate(chain, ic, cfg, "linearised")
    t_hi = min(d.times[-1], lin.times[-1], key=lambda v: abs(v - cfg.t0))
    ts = np.linspace(cfg.t0, t_hi, cfg.samples)
    diff_ = max(float(np.max(np.abs(d.at(t) - lin.at(t)))) for t in ts)
    return {"max_difference": diff_, "t_common": float(t_hi),
            "direct_blowup": d.blowup, "linearised_blowup": lin.blowup,
            "direct": d, "linearised": lin}


# ---------------------------------------------------------------------------
# projective Riccati consistency
# ---------------------------------------------------------------------------

def projective_consistency(A, ic, cfg: RKConfig) -> dict:
    """Integrate X' = A X (2x2) and check that x1 = X1/X0 solves its Riccati equation.

    x1' comes from the derivative of the dense interpolant.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (2, 2):
        raise DomainError("projective_consistency needs a 2x2 matrix")
    tr = integrate(lambda t, X: A @ X, ic, cfg)
    t_hi = tr.dense.t_end
    X0 = tr.states[:, 0]
    crossing = np.nonzero(np.sign(X0[1:]) != np.sign(X0[:-1]))[0]
    shortened = bool(crossing.size) or X0[0] == 0
    if X0[0] == 0:
        raise DomainError("X0 vanishes at the initial time")
    if crossing.size:
        t_hi = tr.times[crossing[0]]
    times = np.linspace(cfg.t0, t_hi, cfg.samples)
    worst = 0.0
    for t in times:
        X, dX = tr.dense(t), tr.dense.derivative(t)
        x1 = X[1] / X[0]
        dx1 = (dX[1] * X[0] - X[1] * dX[0]) / X[0] ** 2
        pred = A[1, 0] + (A[1, 1] - A[0, 0]) * x1 - A[0, 1] * x1 ** 2
        worst = max(worst, abs(dx1 - pred))
    return {"residual": worst, "t_end": float(t_hi), "shortened": shortened}


# ---------------------------------------------------------------------------
# Chazy XII coefficients from a quartic
# ---------------------------------------------------------------------------

@dataclass
class ChazyInstance:
    u: UniPoly
    a: RatFun
    b: RatFun

    def to_json(self) -> dict:
        return {"u": [fraction_str(c) for c in self.u.coeffs],
                "a": {"num": [fraction_str(c) for c in self.a.num.coeffs],
                      "den": [fraction_str(c) for c in self.a.den.coeffs]},
                "b": {"num": [fraction_str(c) for c in self.b.num.coeffs],
                      "den": [fraction_str(c) for c in self.b.den.coeffs]}}


def chazy_constraint(u: UniPoly) -> UniPoly:
    d1 = u.derivative()
    d2 = d1.derivative()
    d3 = d2.derivative()
    d4 = d3.derivative()
    return d4 * u - d3 * d1 + d2 * d2 * Fraction(1, 2)


def chazy_instance(u: UniPoly) -> ChazyInstance:
    if u.is_zero():
        raise DomainError("u must be nonzero")
    if u.degree > 4:
        raise DomainError("u must have degree at most four")
    cons = chazy_constraint(u)
    if not cons.is_zero():
        raise ConstraintViolated({k: fraction_str(c) for k, c in enumerate(cons.coeffs) if c != 0})
    a = RatFun(-u.derivative(), u * 2)
    b = a * a - a.derivative() * Fraction(1, 2)
    return ChazyInstance(u, a, b)


CHAZY_COEFFS = (6, 7, 16, 4)


def chazy_residual(inst: ChazyInstance | RatFun, t, coeffs=CHAZY_COEFFS) -> Fraction:
    """a''' - (6 a'' a + 7 a'^2 - 16 a' a^2 + 4 a^4) at t, exactly."""
    a = inst.a if isinstance(inst, ChazyInstance) else inst
    t = Fraction(t)
    d1 = a.derivative()
    d2 = d1.derivative()
    d3 = d2.derivative()
    A, A1, A2, A3 = a(t), d1(t), d2(t), d3(t)
    c6, c7, c16, c4 = coeffs
    return A3 - (c6 * A2 * A + c7 * A1 * A1 - c16 * A1 * A * A + c4 * A ** 4)


# ---------------------------------------------------------------------------
# continuous derivative matching
# ---------------------------------------------------------------------------

def _float_fn(rf: RatFun):
    num = [float(c) for c in reversed(rf.num.coeffs)]
    den = [float(c) for c in reversed(rf.den.coeffs)]
    return lambda t: np.polyval(num, t) / np.polyval(den, t)


def _real_poles(rf: RatFun) -> list[float]:
    if rf.den.degree <= 0:
        return []
    roots = np.roots([float(c) for c in reversed(rf.den.coeffs)])
    exact = [float(r) for r in rational_roots(rf.den)]
    return sorted(set(exact) | {float(r.real) for r in roots if abs(r.imag) < 1e-12})


@dataclass
class DerivMatchSolution:
    K: float
    xpp0: float
    trajectory: Trajectory
    drift: float
    M: float

    def to_json(self) -> dict:
        return {"K": self.K, "xpp0": self.xpp0, "M": self.M, "drift": self.drift,
                "trajectory": self.trajectory.to_json(("x", "xp"))}


def deriv_match_solve(a: RatFun, b: RatFun, M: float, ic, t1: float,
                      cfg: RKConfig | None = None, margin: float = 0.1) -> DerivMatchSolution:
    """Solve x''x' + 2a x'^2 + 3b x'x + (2ab - b')x^2 = M through its linear partner.

    The nonlinear equation fixes x'' at t0, the ratio of the linear forms fixes
    K, and the linear equation (t - K)x'' + (a t - 1/2 - K a)x' + b(t - K)x = 0
    is integrated on [t0, t1], which must stay ``margin`` away from t = K and
    from the poles of a and b.
    """
    t0, x0, xp0 = (float(v) for v in ic)
    if xp0 == 0:
        raise DomainError("x'(t0) = 0: the nonlinear equation is singular there")
    fa, fb, fdb = _float_fn(a), _float_fn(b), _float_fn(b.derivative())
    poles = _real_poles(a) + _real_poles(b)
    lo, hi = min(t0, t1), max(t0, t1)
    for p in poles:
        if lo - margin <= p <= hi + margin:
            raise DomainError(f"interval [{lo}, {hi}] too close to a pole at t={p}")
    A0, B0, dB0 = fa(t0), fb(t0), fdb(t0)
    xpp0 = (M - 2 * A0 * xp0 ** 2 - 3 * B0 * xp0 * x0 - (2 * A0 * B0 - dB0) * x0 ** 2) / xp0
    den = xpp0 + A0 * xp0 + B0 * x0
    if den == 0:
        raise DomainError("linear form vanishes at t0; K undefined")
    K = (t0 * xpp0 + (A0 * t0 - 0.5) * xp0 + B0 * t0 * x0) / den
    if lo - margin <= K <= hi + margin:
        raise DomainError(f"interval [{lo}, {hi}] touches t = K = {K}")

    def rhs(t, s):
        x, xp = s
        at, bt = fa(t), fb(t)
        return np.array([xp, -((at * t - 0.5 - K * at) * xp + bt * (t - K) * x) / (t - K)])

    cfg = (cfg or RKConfig()).on(t0, t1)
    tr = integrate(rhs, [x0, xp0], cfg)
    worst = 0.0
    for t, (x, xp) in zip(tr.times, tr.states):
        xpp = rhs(t, (x, xp))[1]
        at, bt = fa(t), fb(t)
        f = xpp * xp + 2 * at * xp ** 2 + 3 * bt * xp * x + (2 * at * bt - fdb(t)) * x ** 2
        worst = max(worst, abs(f - M))
    return DerivMatchSolution(K, xpp0, tr, worst, M)


def free_closed_form(t, t0, x0, xp0, M):
    """a = b = 0: x' = c sqrt(t - K) with M = c^2/2 and K = t0 - x0'^2/(2M)."""
    K = t0 - xp0 ** 2 / (2 * M)
    c = np.sign(xp0) * np.sqrt(2 * M)
    return x0 + (2 * c / 3) * ((t - K) ** 1.5 - (t0 - K) ** 1.5)


# ---------------------------------------------------------------------------
# [ode] sections
# ---------------------------------------------------------------------------

def _floats(text):
    return [float(parse_rational(v)) for v in text.split(",") if v.strip()]


def rk_config_from(sect: Mapping, **defaults) -> RKConfig:
    kw = dict(defaults)
    for key in ("t0", "t1", "rtol", "atol"):
        if key in sect:
            kw[key] = float(parse_rational(sect[key]))
    if "tol" in sect:
        kw["rtol"] = kw["atol"] = float(sect["tol"])
    if "samples" in sect:
        kw["samples"] = int(sect["samples"])
    return RKConfig(**kw)


def parse_poly(text: str) -> UniPoly:
    """Polynomial in t from an expression, exactly."""
    from .expr import eval_expr

    val = eval_expr(parse_expr(text, ["t"]), {"t": UniPoly.var()})
    return val if isinstance(val, UniPoly) else UniPoly([Fraction(val)])


def chain_from_section(sect: Mapping) -> tuple[RiccatiChain, list]:
    if "stages" not in sect:
        raise SpecError("riccati chain needs a 'stages' key")
    names = [s.strip() for s in sect["stages"].split(",") if s.strip()]
    params = {k[len("param."):]: float(parse_rational(v)) for k, v in sect.items()
              if k.startswith("param.")}
    rows = []
    for v in names:
        try:
            rows.append((v, sect[f"{v}.a"], sect[f"{v}.b"], sect[f"{v}.c"]))
        except KeyError as exc:
            raise SpecError(f"stage {v!r} needs a, b and c coefficients (missing {exc})") from None
    ic = _floats(sect.get("ic", ""))
    if len(ic) != len(names):
        raise SpecError("'ic' must give one value per stage")
    return RiccatiChain.parse(rows, params), ic


def matrix_from_text(text: str):
    rows = [r for r in text.split(";") if r.strip()]
    return [_floats(r) for r in rows]
