"""Degree growth of iterates in homogeneous coordinates.

Initial data x0 = p (degree 0) and x1 = q/r (degree 1).  Every iterate is a
rational function of s = q/r; after cancelling the gcd of numerator and
denominator its homogeneous degree is max(deg num, deg den), which is what
is recorded.  ``p`` and random parameters are specialised to seeded values,
either rationals (exact mode) or prime-field elements (modular mode).
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import ALT_PRIMES, DEFAULT_PRIME, GF, RatFun
from .errors import DomainError, SingularOrbit
from .specs import random_rational

EXACT = "exact"
MODULAR = "modular"

DEFAULT_N_MAX = {EXACT: 12, MODULAR: 24}

TRANSIENT_FRACTION = 3
EXPONENTIAL_RATIO = Fraction(115, 100)


@dataclass
class DegreeSequence:
    degrees: list
    mode: str
    seed: int
    prime: int | None = None
    specialization: dict = field(default_factory=dict)


@dataclass
class GrowthClass:
    kind: str  # Constant | Linear | Polynomial | Exponential | Undetermined
    order: int | None = None
    evidence: dict = field(default_factory=dict)

    def __str__(self):
        return f"Polynomial({self.order})" if self.kind == "Polynomial" else self.kind


def _field(mode: str, prime: int | None):
    if mode == EXACT:
        return (lambda c: c), Fraction(1), None
    if mode != MODULAR:
        raise DomainError(f"unknown mode {mode!r}")
    p = prime or DEFAULT_PRIME
    return (lambda c: GF(c, p)), GF(1, p), p


def _random_value(rng, modulus):
    if modulus is None:
        return random_rational(rng)
    return GF(rng.randrange(1, modulus), modulus)


def initial_state(system, rng, one, modulus):
    """Homogeneous initial data for each kind of system, plus the observed index."""
    s = RatFun.var(one)
    if system.kind == "three-point":
        return (RatFun(_random_value(rng, modulus) * one), s)
    # first-order systems: first variable carries q/r, the rest are generic constants
    rest = tuple(RatFun(_random_value(rng, modulus) * one) for _ in system.names[1:])
    return (s,) + rest


def degree_sequence(spec, n_max: int | None = None, mode: str = EXACT, seed: int = 0,
                    prime: int | None = None) -> DegreeSequence:
    """Degrees d_0 .. d_{n_max} of the observed variable after gcd cancellation."""
    if n_max is None:
        n_max = DEFAULT_N_MAX[mode]
    if n_max < 2:
        raise DomainError("n_max must be at least 2")
    lift, one, modulus = _field(mode, prime)
    rng = random.Random(seed)
    system = spec.bind(rng, lift=lift, modulus=modulus)
    state = initial_state(system, rng, one, modulus)
    obs = system.observed
    if system.kind == "three-point":
        degrees = [state[0].degree, state[1].degree]
        first_n = 1
    else:
        degrees = [state[obs].degree]
        first_n = 0
    n = first_n
    while len(degrees) < n_max + 1:
        try:
            state = system.step(state, n)
        except DomainError as exc:
            raise SingularOrbit(n, f"identically-zero denominator at step n={n}: {exc}") from None
        degrees.append(state[obs].degree)
        n += 1
    spec_vals = {k: _show(v) for k, v in system.binding.random_values().items()}
    return DegreeSequence(degrees, mode, seed, modulus, spec_vals)


def _show(v):
    if isinstance(v, GF):
        return str(v.v)
    return f"{v.numerator}/{v.denominator}"


def _differences(seq, k):
    out = list(seq)
    for _ in range(k):
        out = [b - a for a, b in zip(out, out[1:])]
    return out


def classify_growth(seq) -> GrowthClass:
    """Classify from the degrees alone.

    The first ceil(n_max/3) entries are a transient.  On the remaining window:
    vanishing first differences -> Constant, second -> Linear, k-th for
    k = 3, 4 -> Polynomial(k-1) (at least two k-th differences required), a
    step ratio >= 1.15 throughout -> Exponential, else Undetermined.
    """
    degrees = list(seq.degrees if isinstance(seq, DegreeSequence) else seq)
    if len(degrees) < 6:
        return GrowthClass("Undetermined", evidence={"reason": "fewer than 6 degrees"})
    n_max = len(degrees) - 1
    skip = math.ceil(n_max / TRANSIENT_FRACTION)
    window = degrees[skip:]
    ev = {"transient": skip, "window": window}
    if len(window) < 3:
        ev["reason"] = "window too short"
        return GrowthClass("Undetermined", evidence=ev)
    if all(d == 0 for d in _differences(window, 1)):
        return GrowthClass("Constant", 0, ev)
    if all(d == 0 for d in _differences(window, 2)):
        return GrowthClass("Linear", 1, ev)
    for k in (3, 4):
        diffs = _differences(window, k)
        if len(diffs) >= 2 and all(d == 0 for d in diffs):
            return GrowthClass("Polynomial", k - 1, ev)
    ratios = [Fraction(b, a) if a else None for a, b in zip(window, window[1:])]
    if all(r is not None and r >= EXPONENTIAL_RATIO for r in ratios):
        ev["min_ratio"] = float(min(ratios))
        return GrowthClass("Exponential", None, ev)
    ev["reason"] = "no rule matched"
    return GrowthClass("Undetermined", evidence=ev)


@dataclass
class CrossCheck:
    runs: list  # (label, DegreeSequence)
    consensus: list
    flagged: list  # steps where the runs disagree
    agree: bool


def cross_check(spec, n_max: int | None = None, seeds=(0, 1),
                primes=(DEFAULT_PRIME, ALT_PRIMES[0]), modular_n_max: int | None = None) -> CrossCheck:
    """Two exact seeds and two (prime, seed) modular runs; flag disagreeing steps.

    The consensus at each step is the largest degree seen: specialisation can
    only cancel more, never less.
    """
    n_exact = n_max if n_max is not None else DEFAULT_N_MAX[EXACT]
    n_mod = modular_n_max if modular_n_max is not None else n_exact
    runs = []
    for s in seeds:
        runs.append((f"exact/seed={s}", degree_sequence(spec, n_exact, EXACT, s)))
    for p, s in zip(primes, seeds):
        runs.append((f"modular/p={p}/seed={s}", degree_sequence(spec, n_mod, MODULAR, s, p)))
    length = min(len(r.degrees) for _, r in runs)
    consensus, flagged = [], []
    for i in range(length):
        vals = {r.degrees[i] for _, r in runs}
        consensus.append(max(vals))
        if len(vals) > 1:
            flagged.append(i)
    return CrossCheck(runs, consensus, flagged, not flagged)
