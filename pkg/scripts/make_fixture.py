#!/usr/bin/env python3
"""Build the bundled rank-0 curve fixture with PARI (cypari).

There is no offline copy of Cremona's tables here, so the fixture is made by
searching small Weierstrass models, reducing to the minimal model, closing each
hit under isogeny, and keeping curves with conductor below the bound.  Every
invariant comes from PARI: conductor and Tamagawa product (ellglobalred),
torsion (elltors), L(E,1) (lfun), the BSD constant Omega*prod(c)/|T|^2 (ellbsd)
and a_n (ellan).  Only rank-0 curves (L(1) clearly nonzero) are written, plus a
short list of rank-1 curves kept separately for l_value tests.

Usage:
    python scripts/make_fixture.py --out src/murmurlab/data/cremona_fixture.jsonl.gz
"""
from __future__ import annotations

import argparse
import gzip
import itertools
import json
import os
import random
import sys
import time

from cypari import pari

pari.set_real_precision(38)

PRIMES = [int(p) for p in pari.primes(500)]
AP_BOUND = PRIMES[-1]


def discriminant(a1, a2, a3, a4, a6):
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


def minimal_key(ainvs):
    # PARI raises on singular input and cypari can crash while unwinding
    if all(isinstance(a, int) for a in ainvs) and discriminant(*ainvs) == 0:
        return None, None
    E = pari.ellinit(ainvs)
    Em = E.ellminimalmodel()
    if isinstance(Em, tuple):
        Em = Em[0]
    return tuple(int(a) for a in Em[:5]), Em


def describe(Em):
    gr = Em.ellglobalred()
    N = int(gr[0])
    l1 = float(pari.lfun(Em, 1))
    tors = int(Em.elltors()[0])
    cprod = int(gr[2])
    bsd = float(Em.ellbsd())
    omega = bsd * tors * tors / cprod
    an = Em.ellan(AP_BOUND)
    ap = [int(an[p - 1]) for p in PRIMES]
    return dict(conductor=N, l1=l1, torsion=tors, tamagawa_product=cprod,
                omega=omega, ap=ap, bsd=bsd)


def analytic_sha(Em):
    """(rank, |Sha|) from L^(r)(1)/r!, a saturated Mordell-Weil basis and BSD; None if gens are short."""
    r, lr = Em.ellanalyticrank()
    r = int(r)
    found = Em.ellrank()
    if int(found[0]) != r or len(found[3]) != r:
        return None
    gens = pari.ellsaturation(Em, found[3], 100)
    reg = pari.matdet(pari.ellheightmatrix(Em, gens)) if r else 1
    sha = float(lr / (Em.ellbsd() * reg))
    if abs(sha - round(sha)) > 1e-6 or round(sha) < 1:
        return None
    return r, int(round(sha))


def isogenous(Em):
    out = []
    try:
        curves = Em.ellisomat()[0]
    except Exception:  # CM or other failure: keep the curve alone
        return out
    for c in curves:
        a4, a6 = c[0]
        out.append([0, 0, 0, a4, a6])
    return out


FUNDAMENTAL = [d for d in range(-120, 121) if d not in (0, 1) and bool(pari.isfundamental(d))]


def twists(Em, N, bound):
    """Quadratic twists that can land below the conductor bound."""
    out = []
    for d in FUNDAMENTAL:
        # twisting by d multiplies N by at most d^2 and divides by at most d^2
        if N > bound * d * d:
            continue
        out.append([int(a) for a in pari.elltwist(Em, d)[:5]])
    return out


def minimal_twist(E):
    d = int(pari.ellminimaltwist(E))
    if d == 1:
        return None
    return [int(a) for a in pari.elltwist(E, d)[:5]]


def fill_sha(path):
    with gzip.open(path, "rt") as fh:
        rows = [json.loads(line) for line in fh]
    kept = []
    for r in rows:
        got = analytic_sha(pari.ellinit(r["ainvs"]))
        if got is None:
            print("dropping", r["label"], file=sys.stderr)
            continue
        r["rank"], r["sha"] = got
        kept.append(r)
    tmp = path + ".tmp"
    with gzip.open(tmp, "wt") as fh:
        for r in kept:
            fh.write(json.dumps(r, separators=(",", ":")) + "\n")
    os.replace(tmp, path)
    print(f"wrote {len(kept)} of {len(rows)} curves to {path}", file=sys.stderr)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", required=True)
    ap.add_argument("--rank1-out", default=None)
    ap.add_argument("--max-conductor", type=int, default=10000)
    ap.add_argument("--a4", type=int, default=60)
    ap.add_argument("--a6", type=int, default=400)
    ap.add_argument("--target", type=int, default=0, help="stop after this many rank-0 curves")
    ap.add_argument("--rank1-cap", type=int, default=200)
    ap.add_argument("--seed", type=int, default=20260301)
    ap.add_argument("--start", type=int, default=0, help="first grid index to scan")
    ap.add_argument("--stop", type=int, default=None, help="grid index to stop before")
    ap.add_argument("--resume", action="store_true", help="extend existing output files")
    ap.add_argument("--fill-sha", action="store_true",
                    help="recompute rank and Sha of the existing --rank1-out file and exit")
    args = ap.parse_args(argv)
    if args.fill_sha:
        return fill_sha(args.rank1_out)

    seen = set()
    rejected = set()
    rank0 = {}
    rank1 = {}
    if args.resume:
        for path, store in ((args.out, rank0), (args.rank1_out, rank1)):
            if path and os.path.exists(path):
                with gzip.open(path, "rt") as fh:
                    for line in fh:
                        r = json.loads(line)
                        r["bsd"] = None
                        store[tuple(r["ainvs"])] = r
        seen.update(rank0, rank1)
    t0 = time.time()
    queue = []

    def consider(ainvs):
        key, Em = minimal_key(ainvs)
        if key is None or key in seen or key in rejected:
            return
        N = int(Em.ellglobalred()[0])
        if N >= args.max_conductor:
            if len(rejected) > 500_000:
                rejected.clear()
            rejected.add(key)
            mt = minimal_twist(Em)
            if mt is not None:
                queue.append(mt)
            return
        seen.add(key)
        rec = describe(Em)
        rec["ainvs"] = list(key)
        if rec["l1"] > 1e-8:
            sha = rec["l1"] / rec["bsd"]
            rec["sha"] = int(round(sha))
            if abs(sha - rec["sha"]) > 1e-6:
                print("non-integral sha", key, sha, file=sys.stderr)
                return
            rec["rank"] = 0
            rank0[key] = rec
        else:
            got = analytic_sha(Em)
            if got is None:
                return
            rec["rank"], rec["sha"] = got
            rank1[key] = rec
        queue.extend(isogenous(Em))
        queue.extend(twists(Em, N, args.max_conductor))

    def dump(path, recs):
        rows = sorted(recs.values(), key=lambda r: (r["conductor"], r["ainvs"]))
        counter = {}
        tmp = path + ".tmp"
        with gzip.open(tmp, "wt") as fh:
            for r in rows:
                N = r["conductor"]
                counter[N] = counter.get(N, 0) + 1
                out = {
                    "label": f"{N}.s{counter[N]}",
                    "conductor": N,
                    "ainvs": r["ainvs"],
                    "rank": r["rank"],
                    "ap": r["ap"],
                    "omega": r["omega"],
                    "tamagawa_product": r["tamagawa_product"],
                    "sha": r["sha"],
                    "torsion": r["torsion"],
                    "l1": r["l1"],
                }
                fh.write(json.dumps(out, separators=(",", ":")) + "\n")
        os.replace(tmp, path)
        print(f"wrote {len(rows)} curves to {path}", file=sys.stderr)

    grid = list(itertools.product((0, 1), (-1, 0, 1), (0, 1),
                                  range(-args.a4, args.a4 + 1), range(-args.a6, args.a6 + 1)))
    random.Random(args.seed).shuffle(grid)
    stop = len(grid) if args.stop is None else min(args.stop, len(grid))
    for i in range(args.start, stop):
        ainvs = grid[i]
        try:
            consider(list(ainvs))
            while queue:
                consider(queue.pop())
        except Exception as exc:  # PARI errors on singular or huge inputs
            print("skip", ainvs, exc, file=sys.stderr)
        if i % 20000 == 0:
            if i and i % 200000 == 0:
                dump(args.out, rank0)
            print(f"{i} models, {len(rank0)} rank-0, {len(rank1)} rank>0, "
                  f"{time.time() - t0:.0f}s", file=sys.stderr, flush=True)
        if args.target and len(rank0) >= args.target:
            break

    dump(args.out, rank0)
    if args.rank1_out:
        keep = sorted(rank1, key=lambda k: (rank1[k]["conductor"], k))[: args.rank1_cap]
        dump(args.rank1_out, {k: rank1[k] for k in keep})


if __name__ == "__main__":
    main()
