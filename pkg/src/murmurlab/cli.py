"""Command-line entry point: ``murmurlab {bessel|st-model|ff-census|empirics|checks|reproduce}``.

Every run writes its resolved configuration (``config.json``), one CSV per
table, a markdown summary and ``summary.json`` with pass/fail for each
asserted tolerance into the output directory.  The exit status is 0 only if
every asserted tolerance passes.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from . import suites
from .rational_curves.lmfdb import CACHE_ENV, NetworkDisabledError

log = logging.getLogger("murmurlab")

SUBCOMMANDS = ("bessel", "st-model", "ff-census", "empirics", "checks", "reproduce")
TARGETS = ("bessel-suite", "st-deciles", "ff-table", "sign-flip", "decay-fit", "cv-split", "checks")


class DataMissingError(FileNotFoundError):
    pass


@dataclass
class RunConfig:
    """Global settings plus one parameter block per subcommand."""

    subcommand: str = ""
    seed: int = 20260301
    out: str = "runs"
    threads: int = 1
    bessel: dict = field(default_factory=lambda: {"points": 10_000})
    st_model: dict = field(default_factory=lambda: {"samples": 2_000_000, "primes": 25, "target": 3,
                                                    "bins": 10, "chunk_size": 1 << 17})
    ff_census: dict = field(default_factory=lambda: {"q": [7, 19, 31, 43], "per_curve_out": None})
    empirics: dict = field(default_factory=lambda: {"data": None, "format": "jsonl", "verify_sample": 500,
                                                    "full": False, "fetch": False,
                                                    "conductor_min": 1, "conductor_max": 500})
    reproduce: dict = field(default_factory=lambda: {"target": None})

    @classmethod
    def from_file(cls, path: Optional[str]) -> "RunConfig":
        cfg = cls()
        if path:
            data = json.loads(Path(path).read_text())
            for k, v in data.items():
                key = k.replace("-", "_")
                if not hasattr(cfg, key):
                    raise ValueError(f"unknown config key {k!r}")
                cur = getattr(cfg, key)
                setattr(cfg, key, {**cur, **v} if isinstance(cur, dict) else v)
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# output


def write_csv(path: Path, rows: list[dict]) -> None:
    if not rows:
        path.write_text("")
        return
    keys = list(rows[0])
    for r in rows[1:]:
        keys += [k for k in r if k not in keys]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        w.writerows(rows)


def markdown_table(rows: list[dict]) -> str:
    if not rows:
        return "(empty)\n"
    keys = list(rows[0])

    def fmt(v):
        return f"{v:.4g}" if isinstance(v, float) else str(v)

    lines = ["| " + " | ".join(keys) + " |", "|" + "---|" * len(keys)]
    lines += ["| " + " | ".join(fmt(r.get(k, "")) for k in keys) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def emit(results: list[suites.SuiteResult], cfg: RunConfig, outdir: Path) -> bool:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    md = []
    summary = {"passed": all(r.passed for r in results), "suites": []}
    for res in results:
        for name, rows in res.tables.items():
            write_csv(outdir / f"{name}.csv", rows)
            md.append(f"## {name}\n\n{markdown_table(rows)}")
        md.append(f"## {res.name} checks\n\n" + "\n".join(f"- {c.line()}" for c in res.checks) + "\n")
        md += [f"> {n}\n" for n in res.notes]
        summary["suites"].append({
            "name": res.name, "passed": res.passed, "seconds": round(res.seconds, 2),
            "checks": [asdict(c) for c in res.checks], "notes": res.notes})
        for c in res.checks:
            print(c.line())
        for n in res.notes:
            print(f"  note: {n}")
    (outdir / "report.md").write_text("\n".join(md))
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"{'ALL PASS' if summary['passed'] else 'SOME CHECKS FAILED'}; outputs in {outdir}")
    return summary["passed"]


# ---------------------------------------------------------------------------
# runners


def _st_config(cfg: RunConfig):
    from .sato_tate import STModelConfig, first_primes

    p = cfg.st_model
    primes = p["primes"]
    primes = first_primes(primes) if isinstance(primes, int) else list(primes)
    return STModelConfig(primes=primes, samples=int(p["samples"]), target_prime=int(p["target"]),
                         bins=p["bins"], seed=cfg.seed, chunk_size=int(p["chunk_size"]),
                         workers=cfg.threads)


def _records(cfg: RunConfig):
    from .rational_curves import records as rc
    from .rational_curves.lmfdb import LMFDBClient, fetch_lmfdb

    e = cfg.empirics
    if e.get("fetch"):
        client = LMFDBClient(allow_network=True)
        try:
            return fetch_lmfdb(int(e["conductor_min"]), int(e["conductor_max"]), client)
        finally:
            client.close()
    path = e.get("data") or rc.bundled_fixture()
    if not Path(path).exists():
        raise DataMissingError(
            f"curve data {path} not found; convert Cremona tables with "
            "`python3 scripts/convert_cremona.py allbsd.* --out curves.jsonl.gz` or pass --fetch")
    rep = rc.ingest(path, format=e.get("format", "jsonl"))
    if rep.errors:
        log.warning("%d rows rejected while reading %s", len(rep.errors), path)
    return rep.records


def run_bessel(cfg):
    return [suites.bessel_suite(int(cfg.bessel["points"]))]


def run_st(cfg):
    return [suites.st_suite(_st_config(cfg))]


def run_ff(cfg):
    out = cfg.ff_census.get("per_curve_out")
    if out:
        with open(out, "w") as fh:
            return [suites.ff_suite(cfg.ff_census["q"], cfg.threads, fh)]
    return [suites.ff_suite(cfg.ff_census["q"], cfg.threads)]


def run_empirics(cfg):
    recs = _records(cfg)
    e = cfg.empirics
    res = [suites.empirics_fixture_suite(recs, int(e["verify_sample"]), cfg.seed)]
    res.append(suites.empirics_full_suite(recs, assert_full=bool(e["full"])))
    return res


def run_checks(cfg):
    return [suites.checks_suite()]


def _subset(res: suites.SuiteResult, tables: tuple[str, ...], check_prefix: tuple[str, ...]):
    res.tables = {k: v for k, v in res.tables.items() if k in tables}
    res.checks = [c for c in res.checks if c.name.startswith(check_prefix)]
    return res


def run_reproduce(cfg):
    target = cfg.reproduce.get("target")
    if target == "bessel-suite":
        return run_bessel(cfg)
    if target == "st-deciles":
        return run_st(cfg)
    if target == "ff-table":
        return run_ff(cfg)
    if target == "checks":
        return run_checks(cfg)
    recs = _records(cfg)
    full = suites.empirics_full_suite(recs, assert_full=bool(cfg.empirics["full"]))
    if target == "sign-flip":
        return [_subset(full, ("sign_flip",), ("sign-flip",))]
    if target == "decay-fit":
        return [_subset(full, ("decay_fit",), ("decay",))]
    if target == "cv-split":
        return [_subset(full, ("cv_split",), ("grouped",))]
    raise ValueError(f"unknown target {target!r}; choose from {', '.join(TARGETS)}")


RUNNERS = {"bessel": run_bessel, "st-model": run_st, "ff-census": run_ff,
           "empirics": run_empirics, "checks": run_checks, "reproduce": run_reproduce}


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override its values")
    common.add_argument("--out", help="output directory (default runs/<subcommand>)")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int, help="global thread budget")
    common.add_argument("--cache-dir", help=f"download cache (also ${CACHE_ENV})")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="murmurlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="subcommand", required=True)
    p = sub.add_parser("bessel", parents=[common], help="tilted semicircle suite")
    p.add_argument("--points", type=int)
    p = sub.add_parser("st-model", parents=[common], help="Sato-Tate Monte Carlo deciles")
    p.add_argument("--samples", type=int)
    p.add_argument("--primes", type=int, help="number of primes in the model")
    p.add_argument("--target", type=int, help="target prime")
    p.add_argument("--bins", type=int)
    p = sub.add_parser("ff-census", parents=[common], help="function-field type census")
    p.add_argument("--q", type=int, nargs="+")
    p.add_argument("--per-curve-out", help="write one JSON line per curve here")

    def empirics_flags(p):
        p.add_argument("--data", help="curve records (jsonl[.gz] or Cremona allbsd)")
        p.add_argument("--format", choices=("jsonl", "cremona"))
        p.add_argument("--verify-sample", type=int)
        p.add_argument("--full", action="store_true", default=None,
                       help="assert full-database tolerances")
        p.add_argument("--fetch", action="store_true", default=None, help="download from LMFDB")
        p.add_argument("--conductor-min", type=int)
        p.add_argument("--conductor-max", type=int)

    empirics_flags(sub.add_parser("empirics", parents=[common], help="rational-curve statistics"))
    sub.add_parser("checks", parents=[common], help="Kloosterman, Petersson and mollifier checks")
    p = sub.add_parser("reproduce", parents=[common], help="regenerate one table dataset")
    p.add_argument("target", choices=TARGETS)
    p.add_argument("--q", type=int, nargs="+")
    p.add_argument("--samples", type=int)
    empirics_flags(p)
    return ap


_BLOCKS = {
    "points": "bessel", "samples": "st_model", "primes": "st_model",
    "bins": "st_model", "q": "ff_census", "per_curve_out": "ff_census", "data": "empirics",
    "format": "empirics", "verify_sample": "empirics", "full": "empirics", "fetch": "empirics",
    "conductor_min": "empirics", "conductor_max": "empirics",
}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_file(args.config)
    cfg.subcommand = args.subcommand
    for key in ("seed", "threads"):
        if getattr(args, key, None) is not None:
            setattr(cfg, key, getattr(args, key))
    cfg.out = args.out or os.path.join(cfg.out, args.subcommand + (
        f"-{args.target}" if args.subcommand == "reproduce" else ""))
    ns = vars(args)
    if args.subcommand == "reproduce":
        cfg.reproduce["target"] = args.target
    elif args.subcommand == "st-model" and ns.get("target") is not None:
        cfg.st_model["target"] = args.target
    for key, block in _BLOCKS.items():
        if ns.get(key) is not None:
            getattr(cfg, block)[key] = ns[key]
    return cfg


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.cache_dir:
        os.environ[CACHE_ENV] = args.cache_dir
    try:
        cfg = resolve_config(args)
        results = RUNNERS[args.subcommand](cfg)
    except (DataMissingError, NetworkDisabledError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0 if emit(results, cfg, Path(cfg.out)) else 1


if __name__ == "__main__":
    sys.exit(main())
