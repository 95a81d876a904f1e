"""Confinement probe of the quadratic three-point relation generated by g(n),
for several choices of g, at every auto-detected site."""
from __future__ import annotations

import argparse
from dataclasses import dataclass, field

from linearisable.confinement import ProbeConfig, find_singular_sites, probe_confinement
from linearisable.derivmatch import as_mapspec, build_g_example
from linearisable.specs import CoeffSeq


@dataclass
class Config:
    g_list: list = field(default_factory=lambda: ["1", "n + 1", "n^2 + 1", "2*n + 3"])
    a: str = "0"
    M: str = "-1"
    N_max: int = 10
    seed: int = 0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--g", action="append", dest="g_list", help="g(n); repeatable")
    ap.add_argument("--a", default=Config.a)
    ap.add_argument("--M", default=Config.M)
    ap.add_argument("--N-max", type=int, default=Config.N_max)
    args = ap.parse_args()
    cfg = Config(g_list=args.g_list or Config().g_list, a=args.a, M=args.M, N_max=args.N_max)
    probe = ProbeConfig(N_max=cfg.N_max, seed=cfg.seed)
    for g in cfg.g_list:
        ex = build_g_example(CoeffSeq.parse(g), CoeffSeq.parse(cfg.a).at(0), CoeffSeq.parse(cfg.M).at(0))
        spec = as_mapspec(ex.f, name=f"g = {g}")
        for site in find_singular_sites(spec, probe.n0, probe.seed):
            if site.value is None:
                continue  # the infinity site needs many steps of growing series; skipped here
            rep = probe_confinement(spec, site, probe)
            print(f"g = {g:<8} {site.describe():<14} {rep.status}")


if __name__ == "__main__":
    main()
