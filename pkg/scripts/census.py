#!/usr/bin/env python3
"""Type census for a list of q, with timing and the cross-q closed-form checks.

    python3 scripts/census.py 7 19 31 43 [--per-curve-dir out/]
"""
import argparse
import time
from pathlib import Path

from murmurlab.function_field import TABLE_TYPES, quasi_polynomial_check, type_census, write_per_curve


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("q", type=int, nargs="+")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--per-curve-dir")
    args = ap.parse_args(argv)
    results = {}
    print("q  " + "  ".join(TABLE_TYPES) + "  seconds")
    for q in args.q:
        t0 = time.time()
        res = type_census(q, workers=args.workers, keep_classes=bool(args.per_curve_dir))
        dt = time.time() - t0
        results[q] = res
        row = res.table_row()
        print(q, *(int(row[t]) for t in TABLE_TYPES), f"{dt:.1f}")
        if args.per_curve_dir:
            out = Path(args.per_curve_dir)
            out.mkdir(parents=True, exist_ok=True)
            with open(out / f"curves_q{q}.jsonl", "w") as fh:
                write_per_curve(res, fh)
        for r in res.rows():
            print("   ", r["type"], r["count"], "Sha", r["sha"])
    rep = quasi_polynomial_check(results)
    print("closed-form mismatches:", rep.mismatches or "none")


if __name__ == "__main__":
    main()
