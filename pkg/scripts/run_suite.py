"""Run the acceptance battery and write its JSON report."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from linearisable.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "results" / "acceptance.json"))
    args = ap.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    code = cli_main(["suite", "--out", args.out])
    print(f"report written to {args.out}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
