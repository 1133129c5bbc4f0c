#!/usr/bin/env python3
"""Convert Cremona allbsd tables (optionally with aplist files) to curve-record JSONL.

    python3 scripts/convert_cremona.py allbsd.00000-09999 allbsd.10000-19999 \
        --aplist aplist.00000-09999 --out curves.jsonl.gz

a_p missing from the aplist files are counted on the minimal model.
"""
import argparse
import logging
import sys

from murmurlab.rational_curves import convert_cremona, write_jsonl


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("tables", nargs="+")
    ap.add_argument("--aplist", nargs="*", default=[])
    ap.add_argument("--out", required=True)
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO)
    records, errors = [], 0
    for i, path in enumerate(args.tables):
        rep = convert_cremona(path, args.aplist[i] if i < len(args.aplist) else None)
        records += rep.records
        errors += len(rep.errors)
        for line, msg in rep.errors[:5]:
            logging.warning("%s:%d %s", path, line, msg)
    n = write_jsonl(records, args.out)
    print(f"wrote {n} records to {args.out} ({errors} rows rejected)")
    return 0 if n else 1


if __name__ == "__main__":
    sys.exit(main())
