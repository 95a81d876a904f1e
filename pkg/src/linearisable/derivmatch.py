"""Discrete derivative matching: a quadratic three-point invariant paired with a
linear-fractional one.

The nonlinear relation is ``f(xm, x, xb; n) = M`` with ``f`` of total degree
two and at most linear separately in ``xm`` and ``xb``.  The linear side is

    (alpha*xb + beta*(x - a) + gamma*xm + delta)
    ------------------------------------------------ = K
    (eps*xb  + zeta*(x - a) + eta*xm  + theta)

Solving the nonlinear relation once fixes ``K``; the linear recursion then
carries the orbit, and ``f`` stays equal to ``M`` along it exactly.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import DomainError, SingularStep, SpecError
from .expr import BinOp, Const, Expr, Neg, Pow, Sym, eval_expr, free_symbols, parse_expr
from .orbit import Orbit
from .specs import CoeffSeq

# monomials as exponent triples over (xm, x, xb)
MONOMIALS = {
    (0, 0, 0): "1",
    (1, 0, 0): "xm",
    (0, 1, 0): "x",
    (0, 0, 1): "xb",
    (1, 1, 0): "xm*x",
    (0, 1, 1): "x*xb",
    (1, 0, 1): "xm*xb",
    (0, 2, 0): "x^2",
}
VARS = ("xm", "x", "xb")


def monomial_name(exps) -> str:
    parts = []
    for v, e in zip(VARS, exps):
        if e == 1:
            parts.append(v)
        elif e > 1:
            parts.append(f"{v}^{e}")
    return "*".join(parts) or "1"


def _as_seq(c) -> CoeffSeq:
    if isinstance(c, CoeffSeq):
        return c
    if callable(c):
        return CoeffSeq.of(c)
    return CoeffSeq.const(c)


@dataclass(frozen=True)
class QuadFormSpec:
    """``f`` as monomial -> coefficient sequence in n, with its target value ``M``."""

    coeffs: Mapping  # {(i, j, k): CoeffSeq}
    M: Fraction = Fraction(0)

    @classmethod
    def from_dict(cls, coeffs: Mapping, M=0) -> "QuadFormSpec":
        return cls({tuple(k): _as_seq(v) for k, v in coeffs.items()}, Fraction(M))

    def at(self, n: int) -> dict:
        return {k: seq.at(n) for k, seq in self.coeffs.items()}

    def evaluate(self, xm, x, xb, n: int):
        total = Fraction(0)
        for (i, j, k), c in self.at(n).items():
            if c == 0:
                continue
            total = total + c * _mono(xm, i) * _mono(x, j) * _mono(xb, k)
        return total

    def split_xb(self, xm, x, n: int):
        """(P, Q) with f = P*xb + Q at fixed (xm, x)."""
        P, Q = Fraction(0), Fraction(0)
        for (i, j, k), c in self.at(n).items():
            if c == 0:
                continue
            term = c * _mono(xm, i) * _mono(x, j)
            if k == 1:
                P = P + term
            else:
                Q = Q + term
        return P, Q


def _mono(v, e):
    if e == 0:
        return 1
    out = v
    for _ in range(e - 1):
        out = out * v
    return out


def validate_quadform(spec: QuadFormSpec) -> list[str]:
    """Violating monomials (empty list means the form is admissible)."""
    bad = []
    for exps in sorted(spec.coeffs):
        i, j, k = exps
        reasons = []
        if i + j + k > 2:
            reasons.append("total degree above two")
        if i > 1:
            reasons.append("quadratic in xm")
        if k > 1:
            reasons.append("quadratic in xb")
        if reasons:
            bad.append(f"{monomial_name(exps)}: " + ", ".join(reasons))
    return bad


# ---------------------------------------------------------------------------
# expanding a polynomial expression into monomials
# ---------------------------------------------------------------------------

def _padd(p, q, sign=1):
    out = dict(p)
    for k, v in q.items():
        if k in out:
            out[k] = BinOp("+" if sign > 0 else "-", out[k], v)
        else:
            out[k] = v if sign > 0 else Neg(v)
    return out


def _pmul(p, q):
    out = {}
    for k1, v1 in p.items():
        for k2, v2 in q.items():
            k = tuple(a + b for a, b in zip(k1, k2))
            term = BinOp("*", v1, v2)
            out[k] = BinOp("+", out[k], term) if k in out else term
    return out


def _expand(node: Expr):
    if isinstance(node, Const):
        return {(0, 0, 0): node}
    if isinstance(node, Sym):
        if node.name in VARS:
            e = [0, 0, 0]
            e[VARS.index(node.name)] = 1
            return {tuple(e): Const(Fraction(1))}
        return {(0, 0, 0): node}
    if isinstance(node, Neg):
        return {k: Neg(v) for k, v in _expand(node.arg).items()}
    if isinstance(node, Pow):
        base = _expand(node.base)
        out = {(0, 0, 0): Const(Fraction(1))}
        for _ in range(node.exp):
            out = _pmul(out, base)
        return out
    left, right = _expand(node.left), _expand(node.right)
    if node.op == "+":
        return _padd(left, right)
    if node.op == "-":
        return _padd(left, right, -1)
    if node.op == "*":
        return _pmul(left, right)
    if free_symbols(node.right) & set(VARS):
        raise SpecError("f must be polynomial in xm, x, xb (division by a state variable)")
    return {k: BinOp("/", v, node.right) for k, v in left.items()}


def quadform_from_expr(text: str, params: Mapping[str, CoeffSeq] | None = None, M=0) -> QuadFormSpec:
    """Expand a polynomial expression in xm, x, xb (coefficients may involve n and params)."""
    params = dict(params or {})
    node = parse_expr(text, list(VARS) + ["n"] + list(params))
    coeffs = {}
    for exps, c in _expand(node).items():
        coeffs[exps] = CoeffSeq.of(_coeff_fn(c, params), text=None)
    return QuadFormSpec(coeffs, Fraction(M))


def _coeff_fn(node, params):
    def fn(n):
        env = {"n": Fraction(n)}
        for name, seq in params.items():
            env[name] = seq.at(n, env)
        return eval_expr(node, env)
    return fn


# ---------------------------------------------------------------------------
# linear form
# ---------------------------------------------------------------------------

LIN_FIELDS = ("alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta")


@dataclass(frozen=True)
class LinThreePoint:
    alpha: CoeffSeq
    beta: CoeffSeq
    gamma: CoeffSeq
    delta: CoeffSeq
    eps: CoeffSeq
    zeta: CoeffSeq
    eta: CoeffSeq
    theta: CoeffSeq
    a: Fraction = Fraction(0)  # middle term is beta*(x - a)

    @classmethod
    def build(cls, a=0, **coeffs) -> "LinThreePoint":
        missing = [k for k in LIN_FIELDS if k not in coeffs]
        if missing:
            raise SpecError(f"linear form missing coefficients {missing}")
        return cls(*(_as_seq(coeffs[k]) for k in LIN_FIELDS), a=Fraction(a))

    def at(self, n: int) -> tuple:
        return tuple(getattr(self, k).at(n) for k in LIN_FIELDS)

    def parts(self, xm, x, xb, n: int):
        al, be, ga, de, ep, ze, et, th = self.at(n)
        mid = x - self.a
        return al * xb + be * mid + ga * xm + de, ep * xb + ze * mid + et * xm + th

    def scaled(self, factor: CoeffSeq) -> "LinThreePoint":
        """All eight coefficients multiplied by a common sequence."""
        def mul(seq):
            return CoeffSeq.of(lambda n, s=seq: s.at(n) * factor.at(n))
        return LinThreePoint(*(mul(getattr(self, k)) for k in LIN_FIELDS), a=self.a)

    def proportional_at(self, n: int) -> bool:
        """Numerator and denominator coefficient vectors proportional at n."""
        v = self.at(n)
        num, den = v[:4], v[4:]
        return all(num[i] * den[j] == num[j] * den[i] for i in range(4) for j in range(4))


# ---------------------------------------------------------------------------
# the worked example built from one function g(n)
# ---------------------------------------------------------------------------

@dataclass
class GExample:
    g: CoeffSeq
    a: Fraction
    f: QuadFormSpec = field(repr=False, default=None)
    lin: LinThreePoint = field(repr=False, default=None)

    def g_at(self, n):
        return Fraction(self.g.at(n))

    def z(self, n):
        return self.g_at(n + 1) + self.g_at(n - 1)

    def zeta(self, n):
        return self.g_at(n + 1) + self.g_at(n)

    def zbar(self, n):
        return self.z(n + 1)

    def A(self, n):
        g = self.g_at
        return g(n) ** 2 * (g(n + 1) + g(n - 1))

    def B(self, n):
        g = self.g_at
        return -(g(n + 1) + g(n)) * g(n + 2) * g(n - 1) - (g(n + 2) + g(n - 1)) * g(n + 1) * g(n)

    def check(self, n):
        for name, val in (("z", self.z(n)), ("zeta", self.zeta(n)), ("zbar", self.zbar(n))):
            if val == 0:
                raise DomainError(f"{name} vanishes at n={n}")


def build_g_example(g, a=0, M=0) -> GExample:
    """Quadratic form and matching linear form generated by a single sequence g(n)."""
    g = _as_seq(g)
    ex = GExample(g, Fraction(a))
    a = ex.a

    def uvw(n):
        ex.check(n)
        return 1 / ex.zbar(n), 1 / ex.zeta(n), 1 / ex.z(n)

    def coef(fn):
        return CoeffSeq.of(lambda n: fn(*uvw(n)))

    # ((xb + x - a)/zbar - x/zeta) * ((xm + x - a)/z - x/zeta) - x^2/zeta^2, expanded
    coeffs = {
        (1, 0, 1): coef(lambda u, v, w: u * w),
        (0, 1, 1): coef(lambda u, v, w: u * (w - v)),
        (0, 0, 1): coef(lambda u, v, w: -a * u * w),
        (1, 1, 0): coef(lambda u, v, w: (u - v) * w),
        (0, 2, 0): coef(lambda u, v, w: (u - v) * (w - v) - v * v),
        (0, 1, 0): coef(lambda u, v, w: -a * w * (u - v) - a * u * (w - v)),
        (1, 0, 0): coef(lambda u, v, w: -a * u * w),
        (0, 0, 0): coef(lambda u, v, w: a * a * u * w),
    }
    ex.f = QuadFormSpec(coeffs, Fraction(M))
    zero = CoeffSeq.const(0)
    ex.lin = LinThreePoint(
        alpha=CoeffSeq.of(ex.A), beta=CoeffSeq.of(ex.B), gamma=CoeffSeq.of(lambda n: ex.A(n + 1)),
        delta=zero,
        eps=CoeffSeq.of(ex.z), zeta=CoeffSeq.of(lambda n: ex.zbar(n) + ex.z(n)), eta=CoeffSeq.of(ex.zbar),
        theta=zero, a=a)
    return ex


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def solve_next(f: QuadFormSpec, M, xm, x, n: int):
    """The unique xb with f(xm, x, xb; n) = M.  Works over any ring with division."""
    P, Q = f.split_xb(xm, x, n)
    if isinstance(P, (int, Fraction)) and P == 0:
        raise SingularStep(n, f"coefficient of xb vanishes at n={n}")
    return (M - Q) / P


def compute_K(lin: LinThreePoint, xm, x, xb, n: int) -> Fraction:
    num, den = lin.parts(xm, x, xb, n)
    if den == 0:
        raise DomainError(f"denominator of the linear form vanishes at n={n}")
    return Fraction(num) / Fraction(den)


def linear_step(lin: LinThreePoint, K, xm, x, n: int) -> Fraction:
    """xb from (alpha - K eps) xb + (beta - K zeta)(x - a) + (gamma - K eta) xm + (delta - K theta) = 0."""
    al, be, ga, de, ep, ze, et, th = lin.at(n)
    lead = al - K * ep
    if lead == 0:
        raise SingularStep(n)
    rest = (be - K * ze) * (x - lin.a) + (ga - K * et) * xm + (de - K * th)
    return -Fraction(rest) / lead


def propagate_linear(lin: LinThreePoint, K, x0, x1, N: int, n0: int = 1) -> Orbit:
    """Orbit x_{n0-1}, x_{n0}, ... of the linear recursion: N values after the two given."""
    K = Fraction(K)
    xs = [Fraction(x0), Fraction(x1)]
    for j in range(N):
        n = n0 + j
        xs.append(linear_step(lin, K, xs[-2], xs[-1], n))
    return Orbit(("x",), [(v,) for v in xs], origin="linearised", start=n0 - 1)


@dataclass
class Conservation:
    all_equal: bool
    values: list  # distinct values of f along the orbit, in order of appearance
    max_deviation: Fraction


def verify_conservation(f: QuadFormSpec, orbit: Orbit, M=None) -> Conservation:
    xs = orbit.values()
    if len(xs) < 3:
        raise DomainError("orbit needs at least three values")
    seen = []
    for i in range(1, len(xs) - 1):
        v = f.evaluate(xs[i - 1], xs[i], xs[i + 1], orbit.start + i)
        if v not in seen:
            seen.append(v)
    ref = Fraction(M) if M is not None else seen[0]
    dev = max(abs(v - ref) for v in seen)
    return Conservation(len(seen) == 1 and (M is None or seen[0] == ref), seen, dev)


def K_along(lin: LinThreePoint, orbit: Orbit) -> list:
    xs = orbit.values()
    return [compute_K(lin, xs[i - 1], xs[i], xs[i + 1], orbit.start + i) for i in range(1, len(xs) - 1)]


@dataclass
class OracleResult:
    passed: bool
    samples: int
    resampled: int
    seed: int
    counterexample: dict | None = None


def _small_rational(rng):
    return Fraction(rng.choice((-1, 1)) * rng.randint(1, 9), rng.randint(1, 9))


def consistency_oracle(f: QuadFormSpec, lin: LinThreePoint, n: int = 1, samples: int = 20,
                       seed: int = 0, max_tries: int = 10_000) -> OracleResult:
    """Exact sampled check that the linear value K is carried along by the nonlinear relation.

    For random (xm, x, xb): K at n, then xbb from f(x, xb, xbb; n+1) = f(xm, x, xb; n),
    then K at n+1 on (x, xb, xbb) must equal the first value exactly.
    """
    rng = random.Random(seed)
    done = resampled = tries = 0
    while done < samples:
        tries += 1
        if tries > max_tries:
            raise DomainError("too many degenerate samples")
        xm, x, xb = (_small_rational(rng) for _ in range(3))
        try:
            k1 = compute_K(lin, xm, x, xb, n)
            c = f.evaluate(xm, x, xb, n)
            xbb = solve_next(f, c, x, xb, n + 1)
            k2 = compute_K(lin, x, xb, xbb, n + 1)
        except (DomainError, SingularStep):
            resampled += 1
            continue
        done += 1
        if k1 != k2:
            return OracleResult(False, done, resampled, seed,
                                {"n": n, "triple": (xm, x, xb), "xbb": xbb, "K_n": k1, "K_n+1": k2})
    return OracleResult(True, done, resampled, seed)


@dataclass
class DerivMatchRun:
    K: Fraction
    orbit: Orbit
    conservation: Conservation
    K_values: list


def derivmatch_run(ex_f: QuadFormSpec, lin: LinThreePoint, M, x0, x1, N: int, n0: int = 1) -> DerivMatchRun:
    """One nonlinear step fixes K, the linear recursion does the rest."""
    M = Fraction(M)
    x2 = solve_next(ex_f, M, Fraction(x0), Fraction(x1), n0)
    K = compute_K(lin, x0, x1, x2, n0)
    orbit = propagate_linear(lin, K, x0, x1, N, n0)
    return DerivMatchRun(K, orbit, verify_conservation(ex_f, orbit, M), K_along(lin, orbit))


def as_mapspec(f: QuadFormSpec, M=None, name: str = "quadform") -> "MapSpec":
    """The three-point map xb = solve_next(f, M, xp, x, n), usable over any ring."""
    from .specs import MapSpec

    target = f.M if M is None else Fraction(M)

    def update(env):
        return solve_next(f, target, env["xp"], env["x"], int(env["n"]))

    return MapSpec(name, update)


def g_example_from_section(sect: Mapping[str, str]):
    """(GExample, M, x0, x1, N) from a ``[derivmatch]`` section with ``g``/``a`` keys."""
    from .specs import parse_rational

    if "g" not in sect:
        raise SpecError("[derivmatch] needs 'g = <expression in n>'")
    g = CoeffSeq.parse(sect["g"])
    M = parse_rational(sect.get("M", "0"))
    ex = build_g_example(g, parse_rational(sect.get("a", "0")), M)
    x0 = parse_rational(sect.get("x0", "1"))
    x1 = parse_rational(sect.get("x1", "2"))
    N = int(sect.get("N", "30"))
    return ex, M, x0, x1, N
