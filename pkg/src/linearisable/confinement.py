"""Singular sites and confinement probes.

A probe starts the mapping with the probed variable at ``site + eps`` (or
``1/eps`` for the site at infinity) and every other free datum at a concrete
witness value, then iterates over truncated Laurent series in ``eps``.  Two
runs with different witnesses are compared: the singularity is confined at
the first step k >= 1 where the value is finite at eps = 0 and its limit
depends on the witness again, i.e. the pre-singular information has come back.

A variable that cannot see any witnessed datum (the probed stage of a
cascade, or a first-order map) is instead confined once it is finite and
still depends on eps.

Step 0 is the first iterate computed from the perturbed datum.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import LaurentSeries, RatFun, fraction_str, rational_roots
from .errors import DomainError, PrecisionExhausted
from .expr import eval_expr, free_symbols, parse_expr
from .specs import random_rational

AUTO = "auto-detected"
USER = "user-supplied"


@dataclass(frozen=True)
class SingularSite:
    variable: str
    value: Fraction | None  # None is the point at infinity
    provenance: str = AUTO

    def describe(self) -> str:
        return f"{self.variable} = {fraction_str(self.value)}"

    def to_json(self) -> dict:
        return {"variable": self.variable, "value": fraction_str(self.value), "provenance": self.provenance}


@dataclass(frozen=True)
class ProbeConfig:
    T: int = 12
    N_max: int = 16
    witnesses: tuple = (Fraction(3, 7), Fraction(5, 11))
    seed: int = 0
    n0: int = 1

    def __post_init__(self):
        if self.T < 4:
            raise DomainError("truncation order T must be at least 4")
        if self.N_max < 2:
            raise DomainError("N_max must be at least 2")
        if len(self.witnesses) != 2 or self.witnesses[0] == self.witnesses[1]:
            raise DomainError("need two distinct witness values")

    def to_json(self) -> dict:
        return {"T": self.T, "N_max": self.N_max, "seed": self.seed, "n0": self.n0,
                "witnesses": [fraction_str(w) for w in self.witnesses]}


@dataclass
class Verdict:
    kind: str  # ConfinedAt | NotConfinedWithin | PrecisionExhausted
    step: int

    def __str__(self):
        return f"{self.kind}({self.step})"


@dataclass
class ConfinementReport:
    site: SingularSite
    status: Verdict
    variable: str  # the variable whose verdict is the status
    per_variable: dict
    leads: list  # per step: {variable: leading exponent or None}
    evidence: dict = field(default_factory=dict)
    singular_steps: list = field(default_factory=list)
    config: ProbeConfig | None = None

    @property
    def confined(self) -> bool:
        return self.status.kind == "ConfinedAt"

    def to_json(self) -> dict:
        return {
            "site": self.site.to_json(),
            "status": str(self.status),
            "variable": self.variable,
            "per_variable": {k: str(v) for k, v in sorted(self.per_variable.items())},
            "leads": self.leads,
            "evidence": self.evidence,
            "singular_steps": self.singular_steps,
            "config": self.config.to_json() if self.config else None,
        }


# ---------------------------------------------------------------------------
# site detection
# ---------------------------------------------------------------------------

class _Dual:
    """v + d*h with h^2 = 0; used for exact partial derivatives over RatFun."""

    __slots__ = ("v", "d")

    def __init__(self, v, d=0):
        self.v, self.d = v, d

    @staticmethod
    def lift(x):
        return x if isinstance(x, _Dual) else _Dual(x, 0)

    def __add__(self, o):
        o = _Dual.lift(o)
        return _Dual(self.v + o.v, self.d + o.d)

    __radd__ = __add__

    def __neg__(self):
        return _Dual(-self.v, -self.d)

    def __sub__(self, o):
        return self + (-_Dual.lift(o))

    def __rsub__(self, o):
        return _Dual.lift(o) - self

    def __mul__(self, o):
        o = _Dual.lift(o)
        return _Dual(self.v * o.v, self.v * o.d + self.d * o.v)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = _Dual.lift(o)
        inv = 1 / o.v
        return _Dual(self.v * inv, (self.d * o.v - self.v * o.d) * inv * inv)

    def __rtruediv__(self, o):
        return _Dual.lift(o) / self


def _eval_update(node, env):
    return node(env) if callable(node) else eval_expr(node, env)


def _candidate_sets(update, env_base, probe_var, diff_var, others, rng, trials=2):
    """Denominator roots and variation roots in ``probe_var``, intersected over random
    substitutions of ``others``."""
    den_sets, var_sets = [], []
    for _ in range(trials):
        env = dict(env_base)
        for o in others:
            env[o] = random_rational(rng)
        env[probe_var] = RatFun.var()
        try:
            val = _eval_update(update, env)
        except (DomainError, ZeroDivisionError):
            continue
        den_sets.append(set(rational_roots(val.den)) if isinstance(val, RatFun) else set())
        if diff_var is None:
            continue
        denv = dict(env)
        if diff_var == probe_var:
            denv[probe_var] = _Dual(RatFun.var(), 1)
        else:
            denv[diff_var] = _Dual(env[diff_var], 1)
        try:
            dval = _eval_update(update, denv)
        except (DomainError, ZeroDivisionError):
            continue
        d = dval.d if isinstance(dval, _Dual) else 0
        if isinstance(d, RatFun) and not d.is_zero():
            var_sets.append(set(rational_roots(d.num)))
        else:
            var_sets.append(set())
    den = set.intersection(*den_sets) if den_sets else set()
    var = set.intersection(*var_sets) if var_sets else set()
    return den, var


def find_singular_sites(spec, n0: int = 1, seed: int = 0) -> list[SingularSite]:
    """Rational candidate sites per variable, plus infinity.

    Three-point maps: roots in x of the update's denominator and of the
    numerator of d(update)/d(xp), with xp generic.  Cascades: for every stage
    and every variable it may depend on, roots of the stage denominator and of
    the numerator of d(stage)/d(own variable) (where the stage loses its own
    degree of freedom), with the remaining variables generic.
    """
    rng = random.Random(seed)
    system = spec.bind(random.Random(seed))
    env_base = system.env_at(n0)
    found = {}

    def add(var, values):
        found.setdefault(var, set()).update(values)

    if system.kind == "three-point":
        den, var = _candidate_sets(spec.update, env_base, spec.var, spec.down, [spec.down], rng)
        add(spec.var, den | var)
        names = [spec.var]
    elif system.kind == "cascade":
        names = list(system.names)
        for st in spec.stages:
            deps = [v for v in names if v in free_symbols(st.update)]
            for u in deps:
                others = [v for v in names if v != u]
                den, var = _candidate_sets(st.update, env_base, u, st.var, others, rng)
                add(u, den | var)
    else:
        names = list(system.names)
        A = spec.matrix_at(env_base)
        for u in names:
            others = [v for v in names if v != u]
            env = {o: random_rational(rng) for o in others}
            env[u] = RatFun.var()
            vals = [env[v] for v in names]
            den = A[0][0] + sum(A[0][j + 1] * vals[j] for j in range(len(vals)))
            if isinstance(den, RatFun):
                # only roots independent of the other variables count
                env2 = {o: random_rational(rng) for o in others}
                env2[u] = RatFun.var()
                vals2 = [env2[v] for v in names]
                den2 = A[0][0] + sum(A[0][j + 1] * vals2[j] for j in range(len(vals2)))
                r2 = set(rational_roots(den2.num)) if isinstance(den2, RatFun) else set()
                add(u, set(rational_roots(den.num)) & r2)
    sites = []
    for v in names:
        for r in sorted(found.get(v, ())):
            sites.append(SingularSite(v, r, AUTO))
        sites.append(SingularSite(v, None, AUTO))
    return sites


def parse_site(text: str, spec=None, seed: int = 0, n0: int = 1) -> SingularSite:
    """``"var: value"``; the value may be ``inf`` or an expression in the spec's parameters."""
    if ":" not in text:
        raise DomainError(f"site must look like 'var: value', got {text!r}")
    var, value = (s.strip() for s in text.split(":", 1))
    if value in ("inf", "infinity", "oo"):
        return SingularSite(var, None, USER)
    params = list(spec.params) if spec is not None and hasattr(spec, "params") else []
    node = parse_expr(value, params + ["n"])
    env = {}
    if spec is not None and params:
        env = spec.bind(random.Random(seed)).env_at(n0)
    env["n"] = Fraction(n0)
    return SingularSite(var, Fraction(eval_expr(node, env)), USER)


# ---------------------------------------------------------------------------
# probing
# ---------------------------------------------------------------------------

def _perturbed(site: SingularSite, T: int) -> LaurentSeries:
    if site.value is None:
        return LaurentSeries(-1, [Fraction(1)] + [Fraction(0)] * (T - 1))
    if site.value == 0:
        return LaurentSeries.eps(T)
    return LaurentSeries(0, [site.value, Fraction(1)] + [Fraction(0)] * (T - 2))


def _witness_visibility(system, probed: str) -> dict:
    """For each variable, whether its iterates can depend on a witnessed datum."""
    spec = system.spec
    if system.kind == "three-point":
        sees = callable(spec.update) or spec.down in free_symbols(spec.update)
        return {spec.var: sees}
    names = list(system.names)
    if system.kind == "cascade":
        deps = {st.var: {v for v in names if v in free_symbols(st.update)} for st in spec.stages}
    else:
        deps = {v: set(names) for v in names}
    out = {}
    for v in names:
        reach, todo = set(), [v]
        while todo:
            u = todo.pop()
            for w in deps[u]:
                if w not in reach:
                    reach.add(w)
                    todo.append(w)
        out[v] = any(w != probed for w in reach)
    return out


def _initial_state(system, site, witness, T):
    spec = system.spec
    if system.kind == "three-point":
        if site.variable != spec.var:
            raise DomainError(f"probed variable must be {spec.var!r}")
        return (Fraction(witness), _perturbed(site, T))
    names = list(system.names)
    if site.variable not in names:
        raise DomainError(f"unknown variable {site.variable!r}")
    return tuple(_perturbed(site, T) if v == site.variable else Fraction(witness) + k
                 for k, v in enumerate(names))


def _lead(v):
    if isinstance(v, LaurentSeries):
        return v.lead if v.coeffs else None
    return 0 if v != 0 else None


def _limit(v):
    """Value at eps = 0: Fraction, or None for a pole."""
    if isinstance(v, LaurentSeries):
        return v.value_at_zero()
    return Fraction(v)


def _eps_dependent(v) -> bool:
    if not isinstance(v, LaurentSeries):
        return False
    return any(c != 0 and v.lead + k > 0 for k, c in enumerate(v.coeffs))


def _run(system, site, witness, cfg):
    state = _initial_state(system, site, witness, cfg.T)
    rows = []
    for k in range(cfg.N_max + 1):
        n = cfg.n0 + k
        try:
            state = system.step(state, n)
        except PrecisionExhausted as exc:
            exc.step = k
            raise
        except DomainError as exc:
            raise DomainError(f"witness {witness} meets an exact singularity at step {k}: {exc}") from None
        if system.kind == "three-point":
            rows.append({system.spec.var: state[1]})
        else:
            rows.append(dict(zip(system.names, state)))
    return rows


def probe_confinement(spec, site: SingularSite, cfg: ProbeConfig | None = None) -> ConfinementReport:
    cfg = cfg or ProbeConfig()
    system = spec.bind(random.Random(cfg.seed))
    names = [spec.var] if system.kind == "three-point" else list(system.names)
    observed = names[-1] if system.kind != "projective" else names[0]
    if system.kind == "three-point":
        observed = spec.var
    visible = _witness_visibility(system, site.variable)
    leads, singular = [], []
    try:
        runs = [_run(system, site, w, cfg) for w in cfg.witnesses]
    except PrecisionExhausted as exc:
        step = exc.step if exc.step is not None else 0
        v = Verdict("PrecisionExhausted", step)
        return ConfinementReport(site, v, observed, {n: v for n in names}, [],
                                 {"advice": "raise the truncation order T"}, [], cfg)
    verdicts, evidence = {}, {}
    exhausted = None
    for k in range(cfg.N_max + 1):
        row_a, row_b = runs[0][k], runs[1][k]
        leads.append({v: _lead(row_a[v]) for v in names})
        if any(_lead(row_a[v]) is not None and _lead(row_a[v]) < 0 for v in names):
            singular.append(k)
        for v in names:
            if v in verdicts:
                continue
            try:
                la, lb = _limit(row_a[v]), _limit(row_b[v])
            except PrecisionExhausted:
                exhausted = exhausted if exhausted is not None else k
                verdicts[v] = Verdict("PrecisionExhausted", k)
                continue
            if k < 1 or la is None or lb is None:
                continue
            if visible[v]:
                ok = la != lb
            else:
                ok = _eps_dependent(row_a[v]) and _eps_dependent(row_b[v])
            if ok:
                verdicts[v] = Verdict("ConfinedAt", k)
                evidence[v] = {"step": k, "limits": [fraction_str(la), fraction_str(lb)],
                               "test": "witness dependence" if visible[v] else "eps dependence"}
    for v in names:
        verdicts.setdefault(v, Verdict("NotConfinedWithin", cfg.N_max))
    return ConfinementReport(site, verdicts[observed], observed, verdicts, leads,
                             evidence.get(observed, {}), singular, cfg)


def probe_all(spec, cfg: ProbeConfig | None = None, sites=None) -> list[ConfinementReport]:
    cfg = cfg or ProbeConfig()
    sites = sites if sites is not None else find_singular_sites(spec, cfg.n0, cfg.seed)
    return [probe_confinement(spec, s, cfg) for s in sites]
