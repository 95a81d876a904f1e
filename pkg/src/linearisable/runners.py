"""Spec file -> analysis -> JSON-ready payload.

Each ``run_*`` function returns ``(payload, ok)``: ``ok`` is False for an
analysis-level failure (a broken conservation law, a mismatching orbit), which
the command line maps to exit status 1.
"""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import cascade as casc
from . import confinement as conf
from . import degree
from . import derivmatch as dm
from . import ode
from .algebra import fraction_str
from .errors import SpecError
from .rk import RKConfig
from .specs import CascadeSpec, MapSpec, ProjectiveSpec, SpecFile, parse_rational, random_rational


def mapping_for(sf: SpecFile, probe: bool = False):
    """The discrete map of a spec file; ``[derivmatch]`` files give their
    quadratic relation as a three-point map (``[probe] M`` overrides M when probing)."""
    if sf.mapping is not None:
        return sf.mapping
    if sf.derivmatch:
        ex, M, *_ = dm.g_example_from_section(sf.derivmatch)
        if probe and "M" in sf.probe:
            M = parse_rational(sf.probe["M"])
        return dm.as_mapspec(ex.f, M, name=sf.derivmatch.get("name", "quadform"))
    raise SpecError("spec file has no [mapping] or [derivmatch] section")


def _int(d: Mapping, key: str, default):
    return int(d[key]) if key in d else default


# ---------------------------------------------------------------------------
# degree growth
# ---------------------------------------------------------------------------

def run_degree_growth(sf: SpecFile, n_max: int | None = None, mode: str = degree.EXACT,
                      seed: int = 0, prime: int | None = None):
    spec = mapping_for(sf)
    n_max = n_max if n_max is not None else _int(sf.run, "n_max", None)
    seq = degree.degree_sequence(spec, n_max, mode, seed, prime)
    cls = degree.classify_growth(seq)
    payload = {
        "analysis": "degree-growth",
        "mapping": getattr(spec, "name", None),
        "mode": seq.mode,
        "seed": seq.seed,
        "prime": seq.prime,
        "degrees": seq.degrees,
        "class": str(cls),
        "evidence": cls.evidence,
        "specialization": seq.specialization,
    }
    return payload, True


def degree_csv(degrees) -> str:
    rows = ["n,degree"] + [f"{n},{d}" for n, d in enumerate(degrees)]
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# confinement
# ---------------------------------------------------------------------------

def probe_config_from(sf: SpecFile, T=None, N_max=None, seed=None) -> conf.ProbeConfig:
    p = sf.probe
    return conf.ProbeConfig(
        T=T if T is not None else _int(p, "T", 12),
        N_max=N_max if N_max is not None else _int(p, "N_max", 16),
        seed=seed if seed is not None else _int(p, "seed", 0),
        n0=_int(p, "n0", 1),
    )


def run_confine(sf: SpecFile, T=None, N_max=None, seed=None, site: str | None = None):
    spec = mapping_for(sf, probe=True)
    cfg = probe_config_from(sf, T, N_max, seed)
    site_text = site or sf.probe.get("site")
    if site_text:
        sites = [conf.parse_site(site_text, spec, cfg.seed, cfg.n0)]
    else:
        sites = conf.find_singular_sites(spec, cfg.n0, cfg.seed)
    reports = [conf.probe_confinement(spec, s, cfg) for s in sites]
    payload = {
        "analysis": "confine",
        "mapping": getattr(spec, "name", None),
        "config": cfg.to_json(),
        "sites": [r.to_json() for r in reports],
        "status": str(reports[0].status) if len(reports) == 1 else None,
    }
    return payload, True


# ---------------------------------------------------------------------------
# cascades and linear lifts
# ---------------------------------------------------------------------------

def _init_from(sf: SpecFile, spec):
    text = sf.run.get("init")
    if not text:
        return None
    out = {}
    for part in text.split(","):
        k, v = (s.strip() for s in part.split(":", 1))
        out[k] = None if v == "inf" else parse_rational(v)
    return out


def run_cascade(sf: SpecFile, N: int | None = None, seed: int = 0):
    spec = mapping_for(sf)
    N = N if N is not None else _int(sf.run, "N", 50)
    if isinstance(spec, CascadeSpec):
        cmp = casc.compare_cascade(spec, _init_from(sf, spec), N, seed)
        payload = {"analysis": "cascade", "mapping": spec.name, "N": N, "seed": seed}
        payload.update(cmp.to_json())
        return payload, cmp.identical
    if isinstance(spec, MapSpec) and not callable(spec.update):
        rng = random.Random(seed)
        w0, w1 = (parse_rational(sf.run[k]) if k in sf.run else random_rational(rng)
                  for k in ("w0", "w1"))
        lin = casc.linearised_three_point(spec, w0, w1, N, seed)
        direct = casc.direct_three_point(spec, w0, w1, N, seed)
        same = lin[:len(direct)] == direct
        payload = {"analysis": "cascade", "mapping": spec.name, "N": N, "seed": seed,
                   "linearised": [fraction_str(v) for v in lin],
                   "direct": [fraction_str(v) for v in direct],
                   "direct_stopped": len(direct) < len(lin),
                   "identical": same and len(direct) == len(lin)}
        return payload, same
    if isinstance(spec, ProjectiveSpec):
        rng = random.Random(seed)
        spec.bind(rng)
        init = {v: random_rational(rng) for v in spec.names}
        orbit = casc.projective_orbit(spec, init, N, seed)
        payload = {"analysis": "cascade", "mapping": spec.name, "N": N, "seed": seed,
                   "linearised": orbit.to_json()}
        return payload, True
    raise SpecError("cascade analysis needs a cascade, projective or three-point [mapping]")


# ---------------------------------------------------------------------------
# discrete derivative matching
# ---------------------------------------------------------------------------

def run_derivmatch(sf: SpecFile, samples: int = 20, seed: int = 0):
    if not sf.derivmatch:
        raise SpecError("spec file has no [derivmatch] section")
    ex, M, x0, x1, N = dm.g_example_from_section(sf.derivmatch)
    oracle = dm.consistency_oracle(ex.f, ex.lin, samples=samples, seed=seed)
    run = dm.derivmatch_run(ex.f, ex.lin, M, x0, x1, N)
    k_const = len(set(run.K_values)) == 1
    payload = {
        "analysis": "derivmatch",
        "M": fraction_str(M),
        "N": N,
        "oracle": {"passed": oracle.passed, "samples": oracle.samples,
                   "resampled": oracle.resampled, "seed": oracle.seed,
                   "counterexample": _json_frac(oracle.counterexample)},
        "K": fraction_str(run.K),
        "K_constant": k_const,
        "orbit": run.orbit.to_json(),
        "conservation": {"all_equal": run.conservation.all_equal,
                         "values": [fraction_str(v) for v in run.conservation.values],
                         "max_deviation": fraction_str(run.conservation.max_deviation)},
    }
    return payload, oracle.passed and run.conservation.all_equal and k_const


def _json_frac(obj):
    if obj is None:
        return None
    if isinstance(obj, dict):
        return {str(k): _json_frac(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_frac(v) for v in obj]
    if isinstance(obj, (Fraction, int)) and not isinstance(obj, bool):
        return fraction_str(obj)
    return obj


# ---------------------------------------------------------------------------
# continuous systems
# ---------------------------------------------------------------------------

def _ode_seed(sect, seed):
    return seed if seed is not None else _int(sect, "seed", 0)


def random_matrix(seed: int, size: int = 2) -> list:
    rng = random.Random(seed)
    return [[rng.uniform(-1.0, 1.0) for _ in range(size)] for _ in range(size)]


def run_ode(sf: SpecFile, tol: float | None = None, seed: int | None = None):
    sect = sf.ode
    if not sect:
        raise SpecError("spec file has no [ode] section")
    kind = sect.get("type", "").strip()
    cfg = ode.rk_config_from(sect)
    if tol is not None:
        cfg = cfg.with_tol(tol)
    base = {"analysis": "ode", "type": kind, "rk": cfg.to_json()}
    if kind == "hamiltonian":
        s = _ode_seed(sect, seed)
        bound = float(parse_rational(sect.get("bound", "1/2")))
        ic = ode.random_hh_state(s, bound)
        tr = ode.hamiltonian_flow(ic, cfg)
        dH, dC = ode.invariant_drift(tr)
        base.update({"seed": s, "ic": list(ic), "drift_H": dH, "drift_C": dC,
                     "blowup": tr.blowup, "steps": tr.n_accepted})
        return base, tr.complete
    if kind == "riccati-chain":
        chain, ic = ode.chain_from_section(sect)
        res = ode.compare_chain(chain, ic, cfg)
        base.update({"names": list(chain.names), "ic": ic,
                     "max_difference": res["max_difference"], "t_common": res["t_common"],
                     "direct_blowup": res["direct_blowup"],
                     "linearised_blowup": res["linearised_blowup"]})
        return base, True
    if kind == "projective":
        if sect.get("A", "").strip() == "random":
            s = _ode_seed(sect, seed)
            A = random_matrix(s)
            base["seed"] = s
        else:
            A = ode.matrix_from_text(sect["A"])
        ic = ode._floats(sect.get("ic", "1, 0"))
        res = ode.projective_consistency(A, ic, cfg)
        base.update({"A": A, "ic": ic, "residual": float(res["residual"]),
                     "t_end": res["t_end"], "shortened": bool(res["shortened"])})
        return base, True
    if kind == "chazy":
        u = ode.parse_poly(sect.get("u", "1"))
        inst = ode.chazy_instance(u)
        s = _ode_seed(sect, seed)
        pts = chazy_points(inst, _int(sect, "points", 20), s)
        resid = [ode.chazy_residual(inst, t) for t in pts]
        M = float(parse_rational(sect.get("M", "1")))
        t0, x0, xp0 = ode._floats(sect.get("ic", "1, 1, 1"))
        t1 = float(parse_rational(sect.get("t1", "3")))
        sol = ode.deriv_match_solve(inst.a, inst.b, M, (t0, x0, xp0), t1, cfg)
        base.update({"instance": inst.to_json(),
                     "residual_points": [fraction_str(t) for t in pts],
                     "residuals": [fraction_str(r) for r in resid],
                     "K": sol.K, "xpp0": sol.xpp0, "M": M, "drift": sol.drift})
        return base, all(r == 0 for r in resid)
    raise SpecError(f"unknown [ode] type {kind!r}")


def chazy_points(inst, count: int, seed: int) -> list:
    """Distinct random rationals avoiding the poles of a."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        t = Fraction(rng.randint(1, 60), rng.randint(1, 13)) * rng.choice((-1, 1))
        if t in out or inst.a.den(t) == 0:
            continue
        out.append(t)
    return out


def to_builtin(obj):
    """numpy scalars and arrays -> plain Python for JSON."""
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_builtin(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    return obj
