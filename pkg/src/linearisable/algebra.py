"""Exact arithmetic: prime fields, univariate polynomials, rational functions,
homogeneous pairs in (q, r) and truncated Laurent series in a perturbation
parameter.

Rationals are :class:`fractions.Fraction` throughout.  Polynomial coefficients
may be ``Fraction`` or :class:`GF` elements; the code below only relies on
field operations, so both work unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import sys
from math import gcd, isqrt, lcm
from typing import Iterable, Sequence

from .errors import DomainError, PrecisionExhausted

NEG_INF = float("-inf")


# ---------------------------------------------------------------------------
# Prime field
# ---------------------------------------------------------------------------

def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


DEFAULT_PRIME = 2**63 - 25
ALT_PRIMES = (2**62 - 57, 2**61 - 1)

for _p in (DEFAULT_PRIME,) + ALT_PRIMES:
    if not is_prime(_p):  # pragma: no cover
        raise RuntimeError(f"configured modulus {_p} is not prime")


class GF:
    """Element of Z/pZ.  Mixed arithmetic with ``int`` and ``Fraction`` lifts the
    other operand into the field."""

    __slots__ = ("v", "p")

    def __init__(self, value, p: int = DEFAULT_PRIME):
        self.p = p
        if isinstance(value, GF):
            self.v = value.v % p
        elif isinstance(value, Fraction):
            den = value.denominator % p
            if den == 0:
                raise DomainError(f"denominator of {value} vanishes mod {p}")
            self.v = value.numerator * pow(den, -1, p) % p
        else:
            self.v = int(value) % p

    def _lift(self, other):
        if isinstance(other, GF):
            if other.p != self.p:
                raise ValueError("mixing different moduli")
            return other
        if isinstance(other, (int, Fraction)):
            return GF(other, self.p)
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return GF((self.v + o.v) % self.p, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return GF((self.v - o.v) % self.p, self.p)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return GF((o.v - self.v) % self.p, self.p)

    def __mul__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return GF(self.v * o.v % self.p, self.p)

    __rmul__ = __mul__

    def inverse(self) -> "GF":
        if self.v == 0:
            raise DomainError("division by zero in prime field")
        return GF(pow(self.v, -1, self.p), self.p)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __neg__(self):
        return GF(-self.v % self.p, self.p)

    def __pos__(self):
        return self

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return GF(pow(self.v, k, self.p), self.p)

    def __eq__(self, other):
        if isinstance(other, GF):
            return self.p == other.p and self.v == other.v
        if isinstance(other, (int, Fraction)):
            try:
                return self.v == GF(other, self.p).v
            except DomainError:
                return False
        return NotImplemented

    def __hash__(self):
        return hash((self.v, self.p))

    def __bool__(self):
        return self.v != 0

    def __repr__(self):
        return f"GF({self.v}, p={self.p})"


# ---------------------------------------------------------------------------
# Univariate polynomials
# ---------------------------------------------------------------------------

def _canon(c):
    return Fraction(c) if isinstance(c, int) else c


def _is_scalar(x) -> bool:
    return isinstance(x, (int, Fraction, GF))


class UniPoly:
    """Dense univariate polynomial, lowest degree first, no trailing zeros."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [_canon(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    # construction helpers
    @classmethod
    def const(cls, c) -> "UniPoly":
        return cls([c])

    @classmethod
    def var(cls, one=Fraction(1)) -> "UniPoly":
        return cls([one - one, one])

    @classmethod
    def monomial(cls, k: int, c=Fraction(1)) -> "UniPoly":
        return cls([c - c] * k + [c])

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self):
        return self.coeffs[-1]

    def __getitem__(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def _coerce(self, other):
        if isinstance(other, UniPoly):
            return other
        if _is_scalar(other):
            return UniPoly([other])
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        a, b = self.coeffs, o.coeffs
        if len(a) < len(b):
            a, b = b, a
        return UniPoly([x + y for x, y in zip(a, b)] + list(a[len(b):]))

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        if _is_scalar(other):
            return UniPoly([c * other for c in self.coeffs])
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        a, b = self.coeffs, o.coeffs
        if not a or not b:
            return UniPoly()
        out = [a[0] - a[0]] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                out[i + j] = out[i + j] + x * y
        return UniPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise DomainError("negative power of a polynomial")
        result = UniPoly([self.coeffs[0] ** 0 if self.coeffs else Fraction(1)])
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __truediv__(self, other):
        if _is_scalar(other):
            if other == 0:
                raise DomainError("division of a polynomial by zero")
            inv = 1 / other
            return self * inv
        return NotImplemented

    def __divmod__(self, other: "UniPoly"):
        if other.is_zero():
            raise DomainError("polynomial division by zero")
        rem = list(self.coeffs)
        db = len(other.coeffs) - 1
        inv = 1 / other.lc
        if len(rem) - 1 < db:
            return UniPoly(), UniPoly(rem)
        quo = [inv - inv] * (len(rem) - db)
        for k in range(len(rem) - 1 - db, -1, -1):
            c = rem[k + db] * inv
            quo[k] = c
            if c != 0:
                for j, y in enumerate(other.coeffs):
                    rem[k + j] = rem[k + j] - c * y
        return UniPoly(quo), UniPoly(rem[:db])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, x):
        acc = x * 0 if self.coeffs else Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        return self * (1 / self.lc)

    def derivative(self) -> "UniPoly":
        return UniPoly([c * k for k, c in enumerate(self.coeffs)][1:])

    def map(self, f) -> "UniPoly":
        return UniPoly([f(c) for c in self.coeffs])

    def __repr__(self):
        if not self.coeffs:
            return "UniPoly(0)"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            terms.append(f"{c}" if k == 0 else f"{c}*t^{k}")
        return "UniPoly(" + " + ".join(terms) + ")"


def poly_gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    """Monic gcd; gcd(0, 0) = 0.

    Over the rationals a gcd modulo a word-size prime is computed first: its
    degree bounds the true one, so a constant modular gcd settles the (very
    common) coprime case without touching big rationals.  Otherwise the
    gcd is found by a multi-modular reconstruction.
    """
    if a.is_zero() or b.is_zero():
        return (a if b.is_zero() else b).monic()
    if all(isinstance(c, Fraction) for c in a.coeffs + b.coeffs):
        if _coprime_mod_p(a, b):
            return UniPoly([Fraction(1)])
        return _gcd_modular(a, b)
    while not b.is_zero():
        a, b = b, (a % b).monic()
    return a.monic()


_CHECK_PRIME = 2**61 - 1


def _to_mod(p: UniPoly, m: int):
    out = []
    for c in p.coeffs:
        d = c.denominator % m
        if d == 0:
            return None
        out.append(c.numerator * pow(d, -1, m) % m)
    return out


def _mod_gcd(x: list[int], y: list[int], m: int) -> list[int]:
    """Monic gcd of coefficient lists modulo m (lowest degree first)."""
    x, y = list(x), list(y)
    while x and x[-1] == 0:
        x.pop()
    while y and y[-1] == 0:
        y.pop()
    if len(x) < len(y):
        x, y = y, x
    while y:
        inv = pow(y[-1], -1, m)
        dy = len(y) - 1
        for k in range(len(x) - 1 - dy, -1, -1):
            c = x[k + dy] * inv % m
            if c:
                for j in range(dy + 1):
                    x[k + j] = (x[k + j] - c * y[j]) % m
        x = x[:dy]
        while x and x[-1] == 0:
            x.pop()
        x, y = y, x
    inv = pow(x[-1], -1, m)
    return [c * inv % m for c in x]


def _coprime_mod_p(a: UniPoly, b: UniPoly, m: int = _CHECK_PRIME) -> bool:
    x, y = _to_mod(a, m), _to_mod(b, m)
    if x is None or y is None or x[-1] == 0 or y[-1] == 0:
        return False
    return len(_mod_gcd(x, y, m)) == 1


def _rational_reconstruct(u: int, m: int):
    """p/q with p ≡ q u (mod m) and |p|, q < sqrt(m/2), or None."""
    bound = isqrt(m // 2)
    r0, r1, t0, t1 = m, u % m, 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if t1 == 0 or abs(t1) > bound or gcd(r1, abs(t1)) != 1:
        return None
    return Fraction(r1, t1)


# word-size primes below 2^62 used for the multi-modular gcd
def _gcd_primes():
    p = 2**62
    while True:
        p -= 1
        if is_prime(p):
            yield p


def _gcd_modular(a: UniPoly, b: UniPoly) -> UniPoly:
    """Monic gcd over Q: CRT over word primes, rational reconstruction, trial division."""
    deg_a, deg_b = a.degree, b.degree
    best_deg = None
    residues, modulus = None, 1
    last = None
    for p in _gcd_primes():
        x, y = _to_mod(a, p), _to_mod(b, p)
        if x is None or y is None or x[-1] == 0 or y[-1] == 0:
            continue
        g = _mod_gcd(x, y, p)
        d = len(g) - 1
        if best_deg is not None and d > best_deg:
            continue  # unlucky prime
        if best_deg is None or d < best_deg:
            best_deg, residues, modulus, last = d, list(g), p, None
            if d == 0:
                return UniPoly([Fraction(1)])
        else:
            residues = [_crt(r, modulus, c, p) for r, c in zip(residues, g)]
            modulus *= p
        cand = [_rational_reconstruct(r, modulus) for r in residues]
        if any(c is None for c in cand):
            continue
        if cand == last:
            # stable over one extra prime: verify by exact division
            poly = UniPoly(cand)
            if (a % poly).is_zero() and (b % poly).is_zero():
                return poly
        last = cand
    raise AssertionError("unreachable")


def _crt(r1: int, m1: int, r2: int, m2: int) -> int:
    return (r1 + m1 * ((r2 - r1) * pow(m1, -1, m2) % m2)) % (m1 * m2)


def rational_roots(p: UniPoly) -> list[Fraction]:
    """Rational roots of a polynomial with rational coefficients, ascending.

    Candidates come from the rational-root theorem applied to the integer
    primitive form; each candidate is checked exactly.
    """
    if p.is_zero():
        return []
    den = lcm(*(Fraction(c).denominator for c in p.coeffs))
    ints = [int(Fraction(c) * den) for c in p.coeffs]
    roots = set()
    shift = 0
    while ints[shift] == 0:
        shift += 1
    if shift:
        roots.add(Fraction(0))
    ints = ints[shift:]
    if len(ints) == 1:
        return sorted(roots)
    a0, an = abs(ints[0]), abs(ints[-1])
    for num in _divisors(a0):
        for d in _divisors(an):
            for cand in (Fraction(num, d), Fraction(-num, d)):
                if UniPoly(ints)(cand) == 0:
                    roots.add(cand)
    return sorted(roots)


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    k = 1
    while k * k <= n:
        if n % k == 0:
            small.append(k)
            if k * k != n:
                large.append(n // k)
        k += 1
    return small + large[::-1]


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------

class RatFun:
    """Reduced quotient num/den of univariate polynomials with monic den."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _reduced=False):
        if not isinstance(num, UniPoly):
            num = UniPoly([num])
        if den is None:
            den = UniPoly([num.coeffs[0] ** 0 if num.coeffs else Fraction(1)])
        elif not isinstance(den, UniPoly):
            den = UniPoly([den])
        if den.is_zero():
            raise DomainError("rational function with zero denominator")
        if not _reduced:
            if num.is_zero():
                den = UniPoly([den.lc ** 0])
            else:
                g = poly_gcd(num, den)
                if g.degree > 0:
                    num, den = num // g, den // g
            inv = 1 / den.lc
            num, den = num * inv, den * inv
        self.num = num
        self.den = den

    @classmethod
    def var(cls, one=Fraction(1)) -> "RatFun":
        return cls(UniPoly.var(one), UniPoly([one]), _reduced=True)

    @property
    def degree(self) -> int:
        """Degree of the induced map of the projective line."""
        return max(0, int(max(self.num.degree, self.den.degree)))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def _coerce(self, other):
        if isinstance(other, RatFun):
            return other
        if isinstance(other, UniPoly):
            return RatFun(other)
        if _is_scalar(other):
            return RatFun(UniPoly([other]), UniPoly([self.den.lc ** 0]), _reduced=True)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.den == o.den:
            return RatFun(self.num + o.num, self.den)
        return RatFun(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den, _reduced=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        if _is_scalar(other):
            if other == 0:
                return self._coerce(0)
            return RatFun(self.num * other, self.den, _reduced=True)
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        # cross-cancel first to keep intermediate degrees low
        g1 = poly_gcd(self.num, o.den)
        g2 = poly_gcd(o.num, self.den)
        n1 = self.num // g1 if g1.degree > 0 else self.num
        d2 = o.den // g1 if g1.degree > 0 else o.den
        n2 = o.num // g2 if g2.degree > 0 else o.num
        d1 = self.den // g2 if g2.degree > 0 else self.den
        num, den = n1 * n2, d1 * d2
        if num.is_zero():
            return self._coerce(0)
        inv = 1 / den.lc
        return RatFun(num * inv, den * inv, _reduced=True)

    __rmul__ = __mul__

    def reciprocal(self) -> "RatFun":
        if self.num.is_zero():
            raise DomainError("division by the zero rational function")
        inv = 1 / self.num.lc
        return RatFun(self.den * inv, self.num * inv, _reduced=True)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.reciprocal()

    def __pow__(self, k: int):
        if k < 0:
            return self.reciprocal() ** (-k)
        return RatFun(self.num ** k, self.den ** k, _reduced=True)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __call__(self, t):
        d = self.den(t)
        if d == 0:
            raise DomainError(f"evaluation at a pole t={t}")
        return self.num(t) / d

    def derivative(self) -> "RatFun":
        return RatFun(self.num.derivative() * self.den - self.num * self.den.derivative(),
                      self.den * self.den)

    def __repr__(self):
        return f"RatFun({self.num!r} / {self.den!r})"


def ratfun_normalize(num: UniPoly, den: UniPoly) -> RatFun:
    """Coprime num/den with monic denominator."""
    if den.is_zero():
        raise DomainError("zero denominator")
    return RatFun(num, den)


# ---------------------------------------------------------------------------
# Homogeneous pairs in (q, r)
# ---------------------------------------------------------------------------
# A homogeneous bivariate form of degree d is stored as {(i, j): c} meaning
# sum c q^i r^j with i + j = d.


def _form_degree(form: dict) -> int:
    degs = {i + j for (i, j), c in form.items() if c != 0}
    if len(degs) > 1:
        raise DomainError(f"form is not homogeneous (degrees {sorted(degs)})")
    return degs.pop() if degs else -1


def dehomogenize(form: dict) -> UniPoly:
    """f(q, r) -> f(s, 1)."""
    if not form:
        return UniPoly()
    top = max(i for i, _ in form)
    cs = [Fraction(0)] * (top + 1)
    for (i, _j), c in form.items():
        cs[i] = cs[i] + c
    return UniPoly(cs)


def homogenize(p: UniPoly, deg: int) -> dict:
    return {(i, deg - i): c for i, c in enumerate(p.coeffs) if c != 0}


@dataclass(frozen=True)
class HomogPair:
    """Reduced ratio N/D of homogeneous forms of a common degree in (q, r)."""

    num: dict
    den: dict
    deg: int

    @classmethod
    def from_ratfun(cls, rf: RatFun) -> "HomogPair":
        d = rf.degree
        return cls(homogenize(rf.num, d), homogenize(rf.den, d), d)

    def to_ratfun(self) -> RatFun:
        return RatFun(dehomogenize(self.num), dehomogenize(self.den))


def homog_reduce(num: dict, den: dict) -> HomogPair:
    """Cancel the gcd of two homogeneous forms of equal degree.

    The gcd is found on the dehomogenized polynomials in s = q/r; the common
    power of r is whatever degree the reduced pair no longer needs.
    """
    dn, dd = _form_degree(num), _form_degree(den)
    if dd < 0:
        raise DomainError("zero denominator form")
    if dn >= 0 and dn != dd:
        raise DomainError(f"forms have unequal degrees {dn} and {dd}")
    return HomogPair.from_ratfun(RatFun(dehomogenize(num), dehomogenize(den)))


# ---------------------------------------------------------------------------
# Truncated Laurent series
# ---------------------------------------------------------------------------

class LaurentSeries:
    """c_0 eps^lead + c_1 eps^(lead+1) + ... + O(eps^(lead + len(coeffs))).

    ``coeffs`` holds only reliable coefficients.  An empty window means the
    value is O(eps^lead) with nothing known beyond that.
    """

    __slots__ = ("lead", "coeffs")

    def __init__(self, lead: int, coeffs: Sequence):
        cs = [Fraction(c) if isinstance(c, int) else c for c in coeffs]
        # strip leading zeros: each one moves lead up and shortens the window
        k = 0
        while k < len(cs) and cs[k] == 0:
            k += 1
        self.lead = lead + k
        self.coeffs = tuple(cs[k:])

    @classmethod
    def eps(cls, order: int, power: int = 1) -> "LaurentSeries":
        return cls(power, [Fraction(1)] + [Fraction(0)] * (order - 1))

    @classmethod
    def constant(cls, c, order: int) -> "LaurentSeries":
        c = Fraction(c)
        if c == 0:
            return cls(order, [])
        return cls(0, [c] + [Fraction(0)] * (order - 1))

    @property
    def prec(self) -> int:
        """Absolute precision: the value is known modulo eps^prec."""
        return self.lead + len(self.coeffs)

    def is_unknown(self) -> bool:
        return not self.coeffs

    def coefficient(self, k: int):
        """Coefficient of eps^k; raises if it lies outside the reliable window."""
        if k >= self.prec:
            raise PrecisionExhausted(f"coefficient of eps^{k} beyond precision {self.prec}")
        if k < self.lead:
            return Fraction(0)
        return self.coeffs[k - self.lead]

    def _add(self, other: "LaurentSeries", sign=1):
        prec = min(self.prec, other.prec)
        lo = min(self.lead, other.lead)
        if prec <= lo:
            return LaurentSeries(prec, [])
        out = [Fraction(0)] * (prec - lo)
        for k, c in enumerate(self.coeffs):
            e = self.lead + k
            if e < prec:
                out[e - lo] += c
        for k, c in enumerate(other.coeffs):
            e = other.lead + k
            if e < prec:
                out[e - lo] += sign * c
        return LaurentSeries(lo, out)

    def _add_scalar(self, c):
        if c == 0:
            return self
        if self.prec <= 0:
            return self
        lo = min(self.lead, 0)
        out = [Fraction(0)] * (self.prec - lo)
        for k, v in enumerate(self.coeffs):
            out[self.lead + k - lo] += v
        out[-lo] += c
        return LaurentSeries(lo, out)

    def __add__(self, other):
        if isinstance(other, LaurentSeries):
            return self._add(other)
        if isinstance(other, (int, Fraction)):
            return self._add_scalar(other)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(self.lead, [-c for c in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, LaurentSeries):
            return self._add(other, -1)
        if isinstance(other, (int, Fraction)):
            return self._add_scalar(-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return Fraction(0)  # exact zero absorbs the series
            return LaurentSeries(self.lead, [c * other for c in self.coeffs])
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        n = min(len(self.coeffs), len(other.coeffs))
        lead = self.lead + other.lead
        if n == 0:
            # one factor is pure O(.), so is the product
            return LaurentSeries(lead, [])
        a, b = self.coeffs, other.coeffs
        out = [sum((a[i] * b[k - i] for i in range(k + 1)), Fraction(0)) for k in range(n)]
        return LaurentSeries(lead, out)

    __rmul__ = __mul__

    def inverse(self) -> "LaurentSeries":
        return laurent_inv(self)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise DomainError("division of a series by exact zero")
            return self * (1 / Fraction(other))
        if isinstance(other, LaurentSeries):
            return self * laurent_inv(other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return Fraction(0)
            return laurent_inv(self) * other
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            return laurent_inv(self) ** (-k)
        result = None
        base = self
        while k:
            if k & 1:
                result = base if result is None else result * base
            base = base * base
            k >>= 1
        return Fraction(1) if result is None else result

    def value_at_zero(self):
        """Limit as eps -> 0, ``None`` for a pole; raises if not determined."""
        if self.lead < 0 and self.coeffs:
            return None
        return self.coefficient(0)

    def __eq__(self, other):
        if isinstance(other, LaurentSeries):
            return self.lead == other.lead and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self.lead, self.coeffs))

    def __repr__(self):
        terms = [f"({c})e^{self.lead + k}" for k, c in enumerate(self.coeffs) if c != 0]
        return "LaurentSeries(" + (" + ".join(terms) or "0") + f" + O(e^{self.prec}))"


def laurent_inv(s: LaurentSeries) -> LaurentSeries:
    """Multiplicative inverse; the reliable window length is preserved."""
    if not s.coeffs:
        raise PrecisionExhausted("cannot invert a series with no reliable leading coefficient")
    a = s.coeffs
    n = len(a)
    inv0 = 1 / a[0]
    b = [inv0]
    for k in range(1, n):
        acc = sum((a[i] * b[k - i] for i in range(1, k + 1)), Fraction(0))
        b.append(-acc * inv0)
    return LaurentSeries(-s.lead, b)


# ---------------------------------------------------------------------------
# misc helpers
# ---------------------------------------------------------------------------

def content_normalize(values: Sequence[Fraction]) -> tuple:
    """Scale a vector of rationals to a primitive integer vector (same projective point)."""
    fr = [Fraction(v) for v in values]
    nz = [v for v in fr if v != 0]
    if not nz:
        return tuple(fr)
    den = lcm(*(v.denominator for v in nz))
    ints = [int(v * den) for v in fr]
    g = 0
    for v in ints:
        g = gcd(g, v)
    return tuple(Fraction(v // g) for v in ints)


def fraction_str(x) -> str:
    """Canonical ``"p/q"`` text for a rational; ``"inf"`` for the point at infinity."""
    if x is None:
        return "inf"
    x = Fraction(x)
    return f"{_int_str(x.numerator)}/{_int_str(x.denominator)}"


def _int_str(i: int) -> str:
    # exact orbits routinely exceed the interpreter's default digit limit
    try:
        return str(i)
    except ValueError:
        old = sys.get_int_max_str_digits()
        sys.set_int_max_str_digits(0)
        try:
            return str(i)
        finally:
            sys.set_int_max_str_digits(old)
