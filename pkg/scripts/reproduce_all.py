#!/usr/bin/env python3
"""Run every reproduce target that works offline and print a pass/fail digest.

    python3 scripts/reproduce_all.py [--out runs/] [--data curves.jsonl.gz --full]
"""
import argparse
import json
import sys
from pathlib import Path

from murmurlab import cli

OFFLINE = ("bessel-suite", "st-deciles", "ff-table", "checks")
DATA = ("sign-flip", "decay-fit", "cv-split")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs")
    ap.add_argument("--data", help="full curve database; the data targets run on the fixture otherwise")
    ap.add_argument("--full", action="store_true", help="assert full-database tolerances")
    args = ap.parse_args(argv)
    digest = {}
    for target in OFFLINE + DATA:
        argv_t = ["reproduce", target, "--out", str(Path(args.out) / target)]
        if target in DATA:
            argv_t += (["--data", args.data] if args.data else []) + (["--full"] if args.full else [])
        print(f"== {target}")
        digest[target] = cli.main(argv_t)
    print(json.dumps({k: "pass" if v == 0 else "FAIL" for k, v in digest.items()}, indent=2))
    return 0 if not any(digest.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
