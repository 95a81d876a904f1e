"""Adaptive Dormand-Prince 5(4) integrator with a quartic dense output.

The interpolant (and its time derivative) is kept for every accepted step, so
trajectories can be sampled and differentiated anywhere on the interval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B4
_D = np.array([-12715105075 / 11282082432, 0.0, 87487479700 / 32700410799,
               -10690763975 / 1880347072, 701980252875 / 199316789632,
               -1453857185 / 822651844, 69997945 / 29380423])


@dataclass(frozen=True)
class RKConfig:
    t0: float = 0.0
    t1: float = 1.0
    rtol: float = 1e-10
    atol: float = 1e-10
    h0: float | None = None
    h_max: float | None = None
    samples: int = 201
    max_steps: int = 1_000_000
    max_value: float = 1e12  # states beyond this count as a blow-up

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise DomainError("tolerances must be positive")
        if self.t1 == self.t0:
            raise DomainError("empty integration interval")
        if self.samples < 2:
            raise DomainError("need at least two samples")

    def with_tol(self, tol: float) -> "RKConfig":
        return RKConfig(self.t0, self.t1, tol, tol, self.h0, self.h_max, self.samples,
                        self.max_steps, self.max_value)

    def on(self, t0: float, t1: float) -> "RKConfig":
        return RKConfig(t0, t1, self.rtol, self.atol, self.h0, self.h_max, self.samples,
                        self.max_steps, self.max_value)

    def to_json(self) -> dict:
        return {"t0": self.t0, "t1": self.t1, "rtol": self.rtol, "atol": self.atol,
                "samples": self.samples}


@dataclass
class DenseSolution:
    """Piecewise quartic interpolant over the accepted steps."""

    t_nodes: list = field(default_factory=list)  # step start times, then the final time
    coeffs: list = field(default_factory=list)   # (r1..r5) per step

    @property
    def t_start(self):
        return self.t_nodes[0]

    @property
    def t_end(self):
        return self.t_nodes[-1]

    def _locate(self, t):
        ts = self.t_nodes
        fwd = ts[-1] >= ts[0]
        lo, hi = (ts[0], ts[-1]) if fwd else (ts[-1], ts[0])
        if not (lo - 1e-12 * max(1.0, abs(lo)) <= t <= hi + 1e-12 * max(1.0, abs(hi))):
            raise DomainError(f"t={t} outside the integrated interval [{lo}, {hi}]")
        arr = np.asarray(ts[:-1]) if fwd else -np.asarray(ts[:-1])
        key = t if fwd else -t
        i = int(np.searchsorted(arr, key, side="right")) - 1
        return min(max(i, 0), len(self.coeffs) - 1)

    def __call__(self, t):
        i = self._locate(t)
        h = self.t_nodes[i + 1] - self.t_nodes[i]
        th = (t - self.t_nodes[i]) / h
        r1, r2, r3, r4, r5 = self.coeffs[i]
        return r1 + th * (r2 + (1 - th) * (r3 + th * (r4 + (1 - th) * r5)))

    def derivative(self, t):
        i = self._locate(t)
        h = self.t_nodes[i + 1] - self.t_nodes[i]
        th = (t - self.t_nodes[i]) / h
        _, r2, r3, r4, r5 = self.coeffs[i]
        P = r3 + th * (r4 + (1 - th) * r5)
        dP = r4 + (1 - 2 * th) * r5
        Q = r2 + (1 - th) * P
        dQ = -P + (1 - th) * dP
        return (Q + th * dQ) / h


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), dim)
    dense: DenseSolution
    n_accepted: int
    n_rejected: int
    n_evals: int
    blowup: float | None = None  # t* where integration had to stop

    @property
    def complete(self) -> bool:
        return self.blowup is None

    def to_json(self, names=None) -> dict:
        return {
            "names": list(names) if names is not None else None,
            "times": [float(t) for t in self.times],
            "states": [[float(v) for v in row] for row in self.states],
            "stats": {"accepted": self.n_accepted, "rejected": self.n_rejected,
                      "evaluations": self.n_evals},
            "blowup": self.blowup,
        }


def _initial_step(f, t0, y0, f0, direction, rtol, atol):
    scale = atol + np.abs(y0) * rtol
    d0 = np.linalg.norm(y0 / scale) / math.sqrt(len(y0))
    d1 = np.linalg.norm(f0 / scale) / math.sqrt(len(y0))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + direction * h0 * f0
    f1 = f(t0 + direction * h0, y1)
    d2 = np.linalg.norm((f1 - f0) / scale) / math.sqrt(len(y0)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def integrate(f: Callable, y0, cfg: RKConfig) -> Trajectory:
    """Integrate y' = f(t, y) from cfg.t0 to cfg.t1.

    Stops early (``blowup`` set) when the step size underflows or the state
    leaves the finite range; the trajectory then covers the reached part only.
    """
    y = np.array(y0, dtype=float)
    if not np.all(np.isfinite(y)):
        raise DomainError("initial condition must be finite")
    t, t_end = float(cfg.t0), float(cfg.t1)
    direction = 1.0 if t_end > t else -1.0
    span = abs(t_end - t)
    h_max = cfg.h_max or span
    k1 = np.asarray(f(t, y), dtype=float)
    evals = 1
    h = cfg.h0 or _initial_step(f, t, y, k1, direction, cfg.rtol, cfg.atol)
    evals += 0 if cfg.h0 else 1
    h = min(h, h_max)
    dense = DenseSolution([t], [])
    acc = rej = 0
    blowup = None
    K = np.empty((7, len(y)))
    while direction * (t_end - t) > 0:
        if acc + rej >= cfg.max_steps:
            blowup = t
            break
        min_h = 10 * np.spacing(abs(t)) + 1e-300
        if h < min_h:
            blowup = t
            break
        last = h >= abs(t_end - t)
        if last:
            h = abs(t_end - t)
        hs = direction * h
        K[0] = k1
        with np.errstate(all="ignore"):
            for i in range(1, 7):
                yi = y + hs * (np.asarray(_A[i]) @ K[:i])
                K[i] = f(t + _C[i] * hs, yi)
            evals += 6
            y_new = y + hs * (_B @ K)
            err_vec = hs * (_E @ K)
            scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
        if not np.isfinite(err) or not np.all(np.isfinite(y_new)):
            rej += 1
            h *= 0.2
            continue
        if err <= 1.0:
            ydiff = y_new - y
            bspl = hs * K[0] - ydiff
            r5 = hs * (_D @ K)
            dense.coeffs.append((y.copy(), ydiff, bspl, ydiff - hs * K[6] - bspl, r5))
            t = t_end if last else t + hs
            dense.t_nodes.append(t)
            y = y_new
            k1 = K[6].copy()
            acc += 1
            if np.max(np.abs(y)) > cfg.max_value:
                blowup = t
                break
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h = min(h * fac, h_max)
        else:
            rej += 1
            h *= max(0.2, 0.9 * err ** -0.2)
    if not dense.coeffs:
        raise DomainError(f"no step could be taken from t={cfg.t0}")
    t_reach = dense.t_end
    times = np.linspace(cfg.t0, t_reach, cfg.samples)
    states = np.array([dense(tt) for tt in times])
    return Trajectory(times, states, dense, acc, rej, evals, blowup)
