"""Declarative mapping specs and the sectioned spec-file format.

A spec file is INI-like UTF-8 text::

    [mapping]
    name = three-point-projective
    type = three-point            # three-point | cascade | projective
    variable = w                  # optional, default x; down-shift is <variable>p
    update = alpha + beta/w + 1/(w*wp)

    [coefficients]
    alpha = random
    beta = (2*n + 1)/3

    [coefficients.gamma]
    table = 1, 2, 3
    period = 3

Cascades list ``stages = y, x`` and give one update expression per stage
variable (``y = (a*y + b)/(c*y + d)``).  Projective specs list
``variables = x1, x2`` and give matrix entries ``A00``, ``A01``, ... in the
coefficients section.  Optional ``[probe]``, ``[run]``, ``[derivmatch]`` and
``[ode]`` sections are kept as plain string dicts for the analyses that
consume them.
"""
from __future__ import annotations

import configparser
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .algebra import GF, RatFun, UniPoly
from .errors import DomainError, SpecError
from .expr import Expr, eval_expr, free_symbols, parse_expr


def random_rational(rng: random.Random) -> Fraction:
    """Single-digit numerator and denominator, random sign."""
    return Fraction(rng.choice((-1, 1)) * rng.randint(1, 9), rng.randint(1, 9))


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        node = parse_expr(text, symbols=())
        value = eval_expr(node, {})
        return Fraction(value)


@dataclass(frozen=True)
class CoeffSeq:
    """A coefficient as a function of n: closed form, table, random placeholder, or callable."""

    expr: Expr | None = None
    table: tuple | None = None
    period: int | None = None
    random: bool = False
    func: Callable[[int], Fraction] | None = field(default=None, compare=False)
    text: str | None = None

    def __post_init__(self):
        if self.table is not None and len(self.table) == 0:
            raise SpecError("coefficient table is empty")
        if self.period is not None and self.period <= 0:
            raise SpecError("table period must be positive")

    @classmethod
    def const(cls, value) -> "CoeffSeq":
        v = Fraction(value)
        return cls(func=lambda n, v=v: v, text=str(v))

    @classmethod
    def of(cls, fn: Callable[[int], Fraction], text: str | None = None) -> "CoeffSeq":
        return cls(func=fn, text=text)

    @classmethod
    def parse(cls, text: str, symbols=("n",)) -> "CoeffSeq":
        text = text.strip()
        if text == "random":
            return cls(random=True, text=text)
        return cls(expr=parse_expr(text, symbols), text=text)

    def at(self, n: int, env: Mapping | None = None):
        if self.random:
            raise DomainError("random coefficient must be instantiated before evaluation")
        if self.func is not None:
            return self.func(n)
        if self.table is not None:
            if self.period is not None:
                return self.table[n % self.period]
            if not 0 <= n < len(self.table):
                raise DomainError(f"n={n} outside the finite coefficient table")
            return self.table[n]
        scope = dict(env or {})
        scope["n"] = Fraction(n)
        return eval_expr(self.expr, scope)

    __call__ = at

    def describe(self) -> str:
        if self.text is not None:
            return self.text
        if self.table is not None:
            return "table(" + ", ".join(str(v) for v in self.table) + (
                f"; period {self.period})" if self.period else ")")
        return "<function>"


class ParamBinding:
    """Concrete parameter values: random placeholders drawn once from a seeded
    generator, other coefficients evaluated per n (in declaration order, so later
    closed forms may reference earlier parameters)."""

    def __init__(self, params: Mapping[str, CoeffSeq], rng: random.Random,
                 lift: Callable | None = None, modulus: int | None = None):
        self.params = dict(params)
        self.lift = lift or (lambda c: c)
        self.fixed = {}
        for name, seq in self.params.items():
            if seq.random:
                if modulus is None:
                    self.fixed[name] = random_rational(rng)
                else:
                    self.fixed[name] = GF(rng.randrange(1, modulus), modulus)
        self._cache = {}

    def at(self, n: int) -> dict:
        if n in self._cache:
            return self._cache[n]
        env = {}
        for name, seq in self.params.items():
            if name in self.fixed:
                env[name] = self.fixed[name]
            else:
                env[name] = self.lift(seq.at(n, env))
        self._cache[n] = env
        return env

    def random_values(self) -> dict:
        return dict(self.fixed)


# ---------------------------------------------------------------------------
# mapping specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MapSpec:
    """Three-point mapping: new value of ``var`` from ``var`` and its down-shift."""

    name: str
    update: Expr | Callable
    params: Mapping[str, CoeffSeq] = field(default_factory=dict)
    var: str = "x"
    down: str = "xp"

    kind = "three-point"

    def __post_init__(self):
        if not callable(self.update):
            syms = free_symbols(self.update)
            allowed = {self.var, self.down, "n"} | set(self.params)
            extra = syms - allowed
            if extra:
                raise SpecError(f"update references undeclared symbols {sorted(extra)}")
            if not syms & {self.var, self.down}:
                raise SpecError("update must involve the variable or its down-shift")

    @property
    def names(self) -> tuple:
        return (self.down, self.var)

    def bind(self, rng: random.Random, lift=None, modulus=None) -> "System":
        return System(self, ParamBinding(self.params, rng, lift, modulus), lift)


@dataclass(frozen=True)
class Stage:
    var: str
    update: Expr


@dataclass(frozen=True)
class CascadeSpec:
    """Ordered homographic stages; stage k may use variables of stages <= k."""

    name: str
    stages: tuple
    params: Mapping[str, CoeffSeq] = field(default_factory=dict)

    kind = "cascade"

    def __post_init__(self):
        if not self.stages:
            raise SpecError("cascade needs at least one stage")
        seen = []
        for st in self.stages:
            allowed = set(seen) | {st.var, "n"} | set(self.params)
            extra = free_symbols(st.update) - allowed
            if extra:
                later = extra & {s.var for s in self.stages}
                what = "a later stage variable" if later else "undeclared symbols"
                raise SpecError(f"stage {st.var!r} references {what} {sorted(extra)}")
            seen.append(st.var)
        self.check_homographic()

    @property
    def names(self) -> tuple:
        return tuple(s.var for s in self.stages)

    def check_homographic(self, trials: int = 2):
        """Each stage must be (a v + b)/(c v + d) in its own variable; checked at
        random rational points for the other symbols."""
        rng = random.Random(12345)
        for _ in range(trials):
            env = {name: random_rational(rng) for name in self.names}
            env["n"] = Fraction(rng.randint(1, 9))
            for p, seq in self.params.items():
                env[p] = random_rational(rng) if seq.random else None
            for p, seq in self.params.items():
                if env[p] is None:
                    try:
                        env[p] = Fraction(seq.at(int(env["n"]), env))
                    except DomainError:
                        env[p] = random_rational(rng)
            for st in self.stages:
                local = dict(env)
                local[st.var] = RatFun.var()
                try:
                    val = eval_expr(st.update, local)
                except DomainError:
                    continue
                if not isinstance(val, RatFun):
                    continue
                if max(val.num.degree, val.den.degree) > 1:
                    raise SpecError(f"stage {st.var!r} is not homographic in its own variable")

    def bind(self, rng: random.Random, lift=None, modulus=None) -> "System":
        return System(self, ParamBinding(self.params, rng, lift, modulus), lift)


@dataclass(frozen=True)
class ProjectiveSpec:
    """Ratios x_mu = X_mu / X_0 of a linear system with matrix entries A[mu][nu]."""

    name: str
    variables: tuple
    size: int  # matrix entries are the parameters A00 .. A{size-1}{size-1}
    params: Mapping[str, CoeffSeq] = field(default_factory=dict)

    kind = "projective"

    def __post_init__(self):
        if self.size < 2:
            raise SpecError("projective matrix must have dimension >= 2")
        if len(self.variables) != self.size - 1:
            raise SpecError("projective spec needs N variables for an (N+1)x(N+1) matrix")
        missing = [f"A{i}{j}" for i in range(self.size) for j in range(self.size)
                   if f"A{i}{j}" not in self.params]
        if missing:
            raise SpecError(f"projective spec missing coefficients {missing}")

    @property
    def names(self) -> tuple:
        return tuple(self.variables)

    def bind(self, rng: random.Random, lift=None, modulus=None) -> "System":
        return System(self, ParamBinding(self.params, rng, lift, modulus), lift)

    def matrix_at(self, env: Mapping) -> list:
        """Matrix entries from a bound parameter environment."""
        return [[env[f"A{i}{j}"] for j in range(self.size)] for i in range(self.size)]


class System:
    """A spec with its parameters bound; advances a state tuple one step over any ring."""

    def __init__(self, spec, binding: ParamBinding, lift=None):
        self.spec = spec
        self.binding = binding
        self.lift = lift or (lambda c: c)
        self.names = spec.names
        self.kind = spec.kind
        if self.kind == "three-point":
            self.observed = 1
        elif self.kind == "cascade":
            self.observed = len(self.names) - 1
        else:
            self.observed = 0

    def _eval(self, node, env):
        if callable(node):
            return node(env)
        return eval_expr(node, env, lift=self.lift)

    def step(self, state: Sequence, n: int) -> tuple:
        env = dict(self.binding.at(n))
        env["n"] = self.lift(Fraction(n))
        spec = self.spec
        if self.kind == "three-point":
            xp, x = state
            env[spec.down] = xp
            env[spec.var] = x
            return (x, self._eval(spec.update, env))
        if self.kind == "cascade":
            env.update(zip(self.names, state))
            return tuple(self._eval(st.update, env) for st in spec.stages)
        A = spec.matrix_at(env)
        den = A[0][0] + sum((A[0][j + 1] * state[j] for j in range(len(state))), self.lift(Fraction(0)))
        out = []
        for mu in range(1, len(A)):
            num = A[mu][0] + sum((A[mu][j + 1] * state[j] for j in range(len(state))),
                                 self.lift(Fraction(0)))
            out.append(num / den)
        return tuple(out)

    def env_at(self, n: int) -> dict:
        env = dict(self.binding.at(n))
        env["n"] = self.lift(Fraction(n))
        return env


# ---------------------------------------------------------------------------
# spec files
# ---------------------------------------------------------------------------

@dataclass
class SpecFile:
    path: str | None
    mapping: object | None = None
    probe: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)
    derivmatch: dict = field(default_factory=dict)
    ode: dict = field(default_factory=dict)
    coefficients: dict = field(default_factory=dict)


def _split_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _read_coefficients(cp: configparser.ConfigParser) -> dict:
    params = {}
    if cp.has_section("coefficients"):
        for key, value in cp.items("coefficients"):
            params[key] = value
    for section in cp.sections():
        if section.startswith("coefficients."):
            params[section.split(".", 1)[1]] = dict(cp.items(section))
    return params


def _build_params(raw: dict) -> dict:
    names = list(raw)
    out = {}
    for name, value in raw.items():
        if isinstance(value, dict):
            if "table" not in value:
                raise SpecError(f"coefficient section {name!r} needs a 'table' key")
            table = tuple(parse_rational(v) for v in _split_list(value["table"]))
            period = int(value["period"]) if "period" in value else None
            out[name] = CoeffSeq(table=table, period=period)
        else:
            out[name] = CoeffSeq.parse(value, symbols=["n"] + names)
    return out


def parse_spec_text(text: str, path: str | None = None) -> SpecFile:
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",),
                                   inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise SpecError(f"malformed spec file: {exc}") from None
    sf = SpecFile(path=path)
    raw = _read_coefficients(cp)
    sf.coefficients = raw
    for sect in ("probe", "run", "derivmatch", "ode"):
        if cp.has_section(sect):
            setattr(sf, sect, dict(cp.items(sect)))
    if cp.has_section("mapping"):
        sf.mapping = build_mapping(dict(cp.items("mapping")), _build_params(raw))
    known = {"mapping", "coefficients", "probe", "run", "derivmatch", "ode"}
    for sect in cp.sections():
        if sect not in known and not sect.startswith("coefficients."):
            raise SpecError(f"unknown section [{sect}]")
    return sf


def load_spec(path) -> SpecFile:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"cannot read spec file {path}: {exc.strerror}") from None
    return parse_spec_text(text, str(p))


def build_mapping(sect: dict, params: dict):
    name = sect.get("name", "unnamed")
    kind = sect.get("type", "three-point").strip()
    pnames = list(params)
    if kind == "three-point":
        var = sect.get("variable", "x").strip()
        down = sect.get("down", var + "p").strip()
        if "update" not in sect:
            raise SpecError("three-point mapping needs an 'update' key")
        update = parse_expr(sect["update"], [var, down, "n"] + pnames)
        return MapSpec(name, update, params, var, down)
    if kind == "cascade":
        if "stages" not in sect:
            raise SpecError("cascade mapping needs a 'stages' key")
        order = _split_list(sect["stages"])
        stages = []
        for k, v in enumerate(order):
            if v not in sect:
                raise SpecError(f"missing update for stage variable {v!r}")
            stages.append(Stage(v, parse_expr(sect[v], order + ["n"] + pnames)))
        return CascadeSpec(name, tuple(stages), params)
    if kind == "projective":
        variables = _split_list(sect.get("variables", ""))
        size = len(variables) + 1
        for i in range(size):
            for j in range(size):
                if f"A{i}{j}" not in params:
                    raise SpecError(f"projective spec missing coefficient A{i}{j}")
        return ProjectiveSpec(name, tuple(variables), size, params)
    raise SpecError(f"unknown mapping type {kind!r}")
