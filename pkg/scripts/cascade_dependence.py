"""Degree growth of a three-stage homographic cascade versus what the last
stage's coefficients depend on.

When x2's coefficients involve only x0 (whose degree stays bounded), the
growth is linear; once they involve x1 (itself growing linearly), the degrees
of x2 become triangular numbers.
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass

from linearisable.degree import EXACT, classify_growth, degree_sequence
from linearisable.specs import parse_spec_text

HEAD = """[mapping]
type = cascade
stages = x0, x1, x2
x0 = (2*x0 + 3)/(5*x0 + 7)
x1 = ((1 + 2*x0)*x1 + 3 + x0)/((4 + x0)*x1 + 5 + 6*x0)
"""

LAST = {
    "x0 only": "x2 = ((1 + 3*x0)*x2 + 2 + x0)/((5 + x0)*x2 + 7 + 4*x0)",
    "x0 and x1": "x2 = ((1 + 3*x0 + x1)*x2 + 2 + x1)/((5 + x1)*x2 + 7 + 4*x0 + 2*x1)",
    "x1 only": "x2 = ((1 + x1)*x2 + 2 + x1)/((5 + x1)*x2 + 7 + 2*x1)",
}


@dataclass
class Config:
    n_max: int = 12
    seed: int = 0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-max", type=int, default=Config.n_max)
    ap.add_argument("--seed", type=int, default=Config.seed)
    cfg = Config(**{k.replace("-", "_"): v for k, v in vars(ap.parse_args()).items()})
    for label, line in LAST.items():
        spec = parse_spec_text(HEAD + line + "\n").mapping
        seq = degree_sequence(spec, cfg.n_max, EXACT, cfg.seed)
        print(f"{label:>10}: {classify_growth(seq)!s:<14} {seq.degrees}")


if __name__ == "__main__":
    main()
