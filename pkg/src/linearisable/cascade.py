"""Integration of homographic cascades through 2x2 matrices.

Each stage x -> (a x + b)/(c x + d) is the projective action of the matrix
((a, b), (c, d)) on the homogeneous pair (x, 1).  A stage is solved by
accumulating matrix products; later stages use the already computed orbits of
earlier ones, so the whole cascade is integrated strictly stage by stage.
The direct path simply iterates the rational update and serves as the oracle.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .algebra import RatFun, UniPoly, content_normalize, poly_gcd
from .errors import BlowUp, DegenerateStage, DomainError, LinearisationUnavailable
from .expr import eval_expr, free_symbols
from .orbit import DIRECT, LINEARISED, Orbit, as_value
from .specs import random_rational


@dataclass(frozen=True)
class MobiusMatrix:
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    @property
    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, o: "MobiusMatrix") -> "MobiusMatrix":
        return MobiusMatrix(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                            self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def scaled(self, k) -> "MobiusMatrix":
        return MobiusMatrix(self.a * k, self.b * k, self.c * k, self.d * k)

    def normalized(self) -> "MobiusMatrix":
        """Divided by the content of its entries (same projective map)."""
        return MobiusMatrix(*content_normalize((self.a, self.b, self.c, self.d)))

    def apply(self, pair):
        p, q = pair
        return (self.a * p + self.b * q, self.c * p + self.d * q)

    @classmethod
    def identity(cls) -> "MobiusMatrix":
        return cls(Fraction(1), Fraction(0), Fraction(0), Fraction(1))

    def as_tuple(self):
        return ((self.a, self.b), (self.c, self.d))


def matrix_product(mats, balanced: bool = False) -> MobiusMatrix:
    """Product M_k ... M_1 of matrices listed in application order."""
    mats = list(mats)
    if not mats:
        return MobiusMatrix.identity()
    if not balanced:
        P = MobiusMatrix.identity()
        for m in mats:
            P = (m @ P).normalized()
        return P
    while len(mats) > 1:
        nxt = [(mats[i + 1] @ mats[i]).normalized() for i in range(0, len(mats) - 1, 2)]
        if len(mats) % 2:
            nxt.append(mats[-1])
        mats = nxt
    return mats[0]


def to_pair(x):
    return (Fraction(1), Fraction(0)) if x is None else (Fraction(x), Fraction(1))


def project(pair):
    p, q = pair
    if q == 0:
        if p == 0:
            raise DomainError("zero homogeneous pair")
        return None
    return p / q


# ---------------------------------------------------------------------------
# matrix extraction
# ---------------------------------------------------------------------------

class _Lin:
    """Unreduced fraction N(v)/D(v) with coefficient lists (lowest degree first).

    Evaluating a stage expression over this type yields the numerator and
    denominator in the stage variable exactly as written, so the Gambier-type
    form (a y x + b x + c y + d)/(f y x + ...) gives its matrix directly.
    """

    __slots__ = ("n", "d")

    def __init__(self, n, d):
        self.n, self.d = n, d

    @staticmethod
    def lift(x):
        return x if isinstance(x, _Lin) else _Lin([x], [Fraction(1)])

    @staticmethod
    def _add(p, q):
        out = [Fraction(0)] * max(len(p), len(q))
        for i, c in enumerate(p):
            out[i] = out[i] + c
        for i, c in enumerate(q):
            out[i] = out[i] + c
        return out

    @staticmethod
    def _mul(p, q):
        out = [Fraction(0)] * (len(p) + len(q) - 1)
        for i, a in enumerate(p):
            for j, b in enumerate(q):
                out[i + j] = out[i + j] + a * b
        return out

    def __add__(self, o):
        o = _Lin.lift(o)
        if self.d == o.d:
            return _Lin(self._add(self.n, o.n), self.d)
        return _Lin(self._add(self._mul(self.n, o.d), self._mul(o.n, self.d)), self._mul(self.d, o.d))

    __radd__ = __add__

    def __neg__(self):
        return _Lin([-c for c in self.n], self.d)

    def __sub__(self, o):
        return self + (-_Lin.lift(o))

    def __rsub__(self, o):
        return _Lin.lift(o) + (-self)

    def __mul__(self, o):
        o = _Lin.lift(o)
        return _Lin(self._mul(self.n, o.n), self._mul(self.d, o.d))

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = _Lin.lift(o)
        if all(c == 0 for c in o.n):
            raise DomainError("division by zero in a stage coefficient")
        return _Lin(self._mul(self.n, o.d), self._mul(self.d, o.n))

    def __rtruediv__(self, o):
        return _Lin.lift(o) / self


def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _matrix_from_lin(val, stage, n):
    num, den = _trim(val.n), _trim(val.d)
    if len(num) > 2 or len(den) > 2:
        # written with a common factor; reduce it away
        N, D = UniPoly(num), UniPoly(den)
        g = poly_gcd(N, D)
        N, D = N // g, D // g
        num, den = list(N.coeffs), list(D.coeffs)
        if len(num) > 2 or len(den) > 2:
            raise DomainError(f"stage {stage!r} is not homographic at n={n}")
    num += [Fraction(0)] * (2 - len(num))
    den += [Fraction(0)] * (2 - len(den))
    return MobiusMatrix(num[1], num[0], den[1], den[0])


def _order_at_zero(rf: RatFun) -> int:
    """Valuation at t = 0 of a nonzero rational function."""
    def val(p):
        k = 0
        while p.coeffs[k] == 0:
            k += 1
        return k
    return val(rf.num) - val(rf.den)


def _projective_limit(entries):
    """Entries given as rational functions of t; the projective limit at t = 0."""
    rfs = [e if isinstance(e, RatFun) else RatFun(e) for e in entries]
    orders = [_order_at_zero(e) for e in rfs if not e.is_zero()]
    if not orders:
        raise DomainError("all matrix entries vanish")
    m = min(orders)
    shift = UniPoly.monomial(abs(m))
    out = []
    for e in rfs:
        if e.is_zero():
            out.append(Fraction(0))
            continue
        scaled = RatFun(e.num, e.den * shift) if m > 0 else RatFun(e.num * shift, e.den)
        out.append(scaled(Fraction(0)))
    return out


def stage_matrix(stage, env: Mapping, n: int) -> MobiusMatrix:
    """Matrix ((a, b), (c, d)) of a homographic stage, earlier variables taken from env.

    An earlier variable at infinity (value ``None``) is handled by substituting
    1/t and taking the projective limit of the matrix as t -> 0.
    """
    infinite = [k for k, v in env.items() if v is None]
    local = dict(env)
    if len(infinite) > 1:
        raise BlowUp(n, f"several earlier variables at infinity at n={n}")
    if infinite:
        t = RatFun.var()
        local[infinite[0]] = 1 / t
    local[stage.var] = _Lin([Fraction(0), Fraction(1)], [Fraction(1)])
    try:
        val = eval_expr(stage.update, local)
    except ZeroDivisionError:
        raise DomainError(f"stage {stage.var!r} coefficients undefined at n={n}") from None
    val = _Lin.lift(val)
    if infinite:
        num, den = _trim(val.n), _trim(val.d)
        if len(num) > 2 or len(den) > 2:
            raise BlowUp(n, f"stage {stage.var!r} not in plain homographic form at infinity")
        num += [Fraction(0)] * (2 - len(num))
        den += [Fraction(0)] * (2 - len(den))
        a, b, c, d = _projective_limit([num[1], num[0], den[1], den[0]])
        M = MobiusMatrix(a, b, c, d)
    else:
        M = _matrix_from_lin(val, stage.var, n)
    if M.det == 0:
        raise DegenerateStage(n, stage.var)
    return M


# ---------------------------------------------------------------------------
# orbits
# ---------------------------------------------------------------------------

def _bind(spec, seed):
    return spec.bind(random.Random(seed))


def default_init(spec, seed: int = 0) -> dict:
    """Seeded random rational initial values (drawn after the parameters)."""
    rng = random.Random(seed)
    spec.bind(rng)  # consume the same draws as the parameters
    return {v: random_rational(rng) for v in spec.names}


def integrate_cascade(spec, init: Mapping, N: int, seed: int = 0) -> Orbit:
    """Linearised orbit n = 0..N: matrix products per stage, stages in order."""
    system = _bind(spec, seed)
    names = list(system.names)
    cols = {}
    for idx, st in enumerate(spec.stages):
        earlier = names[:idx]
        v0 = to_pair(as_value(init[st.var]))
        P = MobiusMatrix.identity()
        col = [project(v0)]
        for n in range(N):
            env = dict(system.env_at(n))
            for e in earlier:
                env[e] = cols[e][n]
            P = (stage_matrix(st, env, n) @ P).normalized()
            col.append(project(P.apply(v0)))
        cols[st.var] = col
    steps = [tuple(cols[v][n] for v in names) for n in range(N + 1)]
    return Orbit(tuple(names), steps, LINEARISED)


def _limit_value(update, env, var, n):
    """Value of the update when the plain substitution fails: the limit in the
    single problematic variable (the one at infinity, else the stage variable)."""
    used = free_symbols(update)
    infinite = [k for k, v in env.items() if v is None and k in used]
    if len(infinite) > 1:
        raise BlowUp(n)
    t = RatFun.var()
    local = dict(env)
    if infinite:
        local[infinite[0]] = 1 / t
    else:
        local[var] = local[var] + t
    try:
        val = eval_expr(update, local)
    except (DomainError, ZeroDivisionError):
        raise BlowUp(n) from None
    if not isinstance(val, RatFun):
        return Fraction(val)
    if val.den(Fraction(0)) == 0:
        return None
    return val(Fraction(0))


def iterate_direct(spec, init: Mapping, N: int, seed: int = 0) -> Orbit:
    """Plain stage-by-stage iteration; infinity passes through as a limit."""
    system = _bind(spec, seed)
    names = list(system.names)
    state = {v: as_value(init[v]) for v in names}
    steps = [tuple(state[v] for v in names)]
    for n in range(N):
        env = dict(system.env_at(n))
        env.update(state)
        new = {}
        for st in spec.stages:
            try:
                if any(env[v] is None for v in names if v in free_symbols(st.update)):
                    raise DomainError("infinite input")
                new[st.var] = Fraction(eval_expr(st.update, env))
            except DomainError:
                try:
                    new[st.var] = _limit_value(st.update, env, st.var, n)
                except BlowUp:
                    return Orbit(tuple(names), steps, DIRECT, blowup=n)
        state = new
        steps.append(tuple(state[v] for v in names))
    return Orbit(tuple(names), steps, DIRECT)


# ---------------------------------------------------------------------------
# three-point maps with a linear lift
# ---------------------------------------------------------------------------

def companion_orbit(alpha, beta, w0, w1, N: int, n0: int = 1) -> list:
    """w(n+1) = alpha(n) + beta(n)/w(n) + 1/(w(n) w(n-1)) through the linear recurrence
    X(n+2) = alpha(n) X(n+1) + beta(n) X(n) + X(n-1) with w(n) = X(n+1)/X(n).

    ``alpha`` and ``beta`` are callables of n.  Returns w_0..w_N, None for infinity.
    """
    X = list(content_normalize((Fraction(1), Fraction(w0), Fraction(w0) * Fraction(w1))))
    out = [as_value(w0), as_value(w1)]
    n = n0
    while len(out) < N + 1:
        nxt = alpha(n) * X[-1] + beta(n) * X[-2] + X[-3]
        X = list(content_normalize((X[-2], X[-1], nxt)))
        if X[-2] == 0 and X[-1] == 0:
            raise BlowUp(n, "homogeneous representative collapsed")
        out.append(None if X[-2] == 0 else X[-1] / X[-2])
        n += 1
    return out


def linearised_three_point(spec, w0, w1, N: int, seed: int = 0, trials: int = 3) -> list:
    """Linear lift of a three-point map of the form alpha + beta/w + 1/(w wp).

    The form is confirmed at random points before the companion recurrence is
    used; any other map raises LinearisationUnavailable.
    """
    system = _bind(spec, seed)
    rng = random.Random(seed + 1)

    def coeffs(n):
        env = system.env_at(n)
        return Fraction(env.get("alpha", 0)), Fraction(env.get("beta", 0))

    for _ in range(trials):
        n = rng.randint(1, 9)
        w, wp = random_rational(rng), random_rational(rng)
        al, be = coeffs(n)
        try:
            got = system.step((wp, w), n)[1]
        except DomainError:
            continue
        if got != al + be / w + 1 / (w * wp):
            raise LinearisationUnavailable(spec.name, "not of the form alpha + beta/w + 1/(w*wp)")
    if w0 is None or w1 is None or w0 == 0:
        raise DomainError("companion lift needs finite w0, w1 with w0 != 0")
    return companion_orbit(lambda n: coeffs(n)[0], lambda n: coeffs(n)[1], w0, w1, N)


def direct_three_point(spec, w0, w1, N: int, seed: int = 0) -> list:
    """Direct iteration of a three-point map; stops (truncated list) at an indeterminate step."""
    system = _bind(spec, seed)
    state = (Fraction(w0), Fraction(w1))
    out = [state[0], state[1]]
    n = 1
    while len(out) < N + 1:
        env = dict(system.env_at(n))
        if any(v is None for v in state):
            try:
                val = _limit_value(spec.update, {spec.down: state[0], spec.var: state[1]} | env,
                                   spec.var, n)
            except BlowUp:
                break
        else:
            try:
                val = Fraction(system.step(state, n)[1])
            except DomainError:
                try:
                    val = _limit_value(spec.update, {spec.down: state[0], spec.var: state[1]} | env,
                                       spec.var, n)
                except BlowUp:
                    break
        out.append(val)
        state = (state[1], val)
        n += 1
    return out


def projective_orbit(spec, init: Mapping, N: int, seed: int = 0) -> Orbit:
    """Ratios x_mu = X_mu/X_0 of the linear system, from the matrix products."""
    system = _bind(spec, seed)
    names = list(system.names)
    X = [Fraction(1)] + [Fraction(init[v]) for v in names]
    steps = [tuple(Fraction(init[v]) for v in names)]
    for n in range(N):
        A = spec.matrix_at(system.env_at(n))
        X = list(content_normalize([sum(A[i][j] * X[j] for j in range(len(X))) for i in range(len(X))]))
        steps.append(tuple(None if X[0] == 0 else X[i] / X[0] for i in range(1, len(X))))
    return Orbit(tuple(names), steps, LINEARISED)


@dataclass
class CascadeComparison:
    linearised: Orbit
    direct: Orbit
    identical: bool
    first_mismatch: int | None

    def to_json(self) -> dict:
        return {"identical": self.identical, "first_mismatch": self.first_mismatch,
                "linearised": self.linearised.to_json(), "direct": self.direct.to_json()}


def compare_cascade(spec, init: Mapping | None = None, N: int = 50, seed: int = 0) -> CascadeComparison:
    init = dict(init) if init is not None else default_init(spec, seed)
    lin = integrate_cascade(spec, init, N, seed)
    direct = iterate_direct(spec, init, N, seed)
    mismatch = None
    for n, (a, b) in enumerate(zip(lin.steps, direct.steps)):
        if a != b:
            mismatch = n
            break
    if mismatch is None and len(lin.steps) != len(direct.steps):
        mismatch = min(len(lin.steps), len(direct.steps))
    return CascadeComparison(lin, direct, mismatch is None, mismatch)
