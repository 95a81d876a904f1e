"""Command-line driver.

Exit status: 0 success, 1 analysis-level failure, 2 usage or spec error.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import acceptance, degree, runners
from .errors import LinearisableError, SpecError
from .report import build_report, emit_json
from .specs import load_spec


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise SpecError(f"usage: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="linearisable", description="Integrability diagnostics for discrete and continuous systems.")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(sp, seed=True):
        sp.add_argument("--spec", required=True, help="spec file")
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="write the report here instead of stdout")

    dg = sub.add_parser("degree-growth", help="degree sequence and growth class")
    common(dg)
    dg.add_argument("--n-max", type=int)
    dg.add_argument("--mode", choices=(degree.EXACT, degree.MODULAR), default=degree.EXACT)
    dg.add_argument("--prime", type=int)
    dg.add_argument("--format", choices=("json", "csv"), default="json")

    cf = sub.add_parser("confine", help="singularity confinement probe")
    common(cf)
    cf.add_argument("--T", type=int)
    cf.add_argument("--N-max", dest="N_max", type=int)
    cf.add_argument("--site", help="'var: value', overrides the spec file")

    cs = sub.add_parser("cascade", help="linearised vs direct orbits")
    common(cs)
    cs.add_argument("--N", type=int)

    dm = sub.add_parser("derivmatch", help="discrete derivative-matching check")
    common(dm)
    dm.add_argument("--samples", type=int, default=20)

    od = sub.add_parser("ode", help="continuous-system checks")
    common(od)
    od.add_argument("--tol", type=float)

    su = sub.add_parser("suite", help="run the full acceptance battery")
    su.add_argument("--out")
    return p


def _write(data: bytes, out: str | None):
    if out:
        with open(out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data.decode("utf-8"))
        sys.stdout.flush()


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("out",)}
    return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in cfg.items()}


def _dispatch(args):
    if args.subcommand == "suite":
        results = acceptance.run_all()
        for r in results:
            print(r.line(), file=sys.stderr)
        payload = {"criteria": [r.to_json() for r in results],
                   "passed": sum(r.passed for r in results), "total": len(results)}
        return payload, all(r.passed for r in results), None
    sf = load_spec(args.spec)
    if args.subcommand == "degree-growth":
        payload, ok = runners.run_degree_growth(sf, args.n_max, args.mode, args.seed, args.prime)
        csv = runners.degree_csv(payload["degrees"]) if args.format == "csv" else None
        return payload, ok, csv
    if args.subcommand == "confine":
        payload, ok = runners.run_confine(sf, args.T, args.N_max, args.seed, args.site)
        return payload, ok, None
    if args.subcommand == "cascade":
        payload, ok = runners.run_cascade(sf, args.N, args.seed)
        return payload, ok, None
    if args.subcommand == "derivmatch":
        payload, ok = runners.run_derivmatch(sf, args.samples, args.seed)
        return payload, ok, None
    payload, ok = runners.run_ode(sf, args.tol, args.seed)
    return payload, ok, None


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        payload, ok, csv = _dispatch(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LinearisableError as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return 1
    if csv is not None:
        _write(csv.encode("utf-8"), getattr(args, "out", None))
    else:
        _write(emit_json(build_report(args.subcommand, _config(args), payload)), getattr(args, "out", None))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
