"""Conservation drifts of the continuous checks as the RK tolerance tightens."""
from __future__ import annotations

import argparse
from dataclasses import dataclass

from linearisable import ode
from linearisable.rk import RKConfig
from linearisable.runners import random_matrix


@dataclass
class Config:
    seed: int = 0
    tols: tuple = (1e-6, 1e-7, 1e-8, 1e-9, 1e-10, 1e-11)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=Config.seed)
    cfg = Config(seed=ap.parse_args().seed)
    hh_ic = ode.random_hh_state(cfg.seed, 0.5)
    quartic = ode.chazy_instance(ode.parse_poly("t^4"))
    A = random_matrix(cfg.seed)
    print(f"{'tol':>8} {'dH':>10} {'dC':>10} {'dM':>10} {'proj':>10}")
    for tol in cfg.tols:
        dH, dC = ode.invariant_drift(ode.hamiltonian_flow(hh_ic, RKConfig(0, 2, tol, tol)))
        dM = ode.deriv_match_solve(quartic.a, quartic.b, 1.0, (1.0, 1.0, 1.0), 3.0,
                                   RKConfig(rtol=tol, atol=tol)).drift
        res = ode.projective_consistency(A, [1.0, 0.3], RKConfig(0, 1, tol, tol))["residual"]
        print(f"{tol:8.0e} {dH:10.2e} {dC:10.2e} {dM:10.2e} {res:10.2e}")


if __name__ == "__main__":
    main()
