"""Curve records: the normalized JSONL schema, validation and converters."""
from __future__ import annotations

import gzip
import io
import json
import logging
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

from .arith import AP_PRIMES, BadReductionError, ap_count

log = logging.getLogger(__name__)

FIELDS = ("label", "conductor", "ainvs", "rank", "ap", "omega", "tamagawa_product", "sha", "torsion", "l1")


@dataclass(frozen=True)
class CurveRecord:
    label: str
    conductor: int
    ainvs: tuple[int, int, int, int, int]
    rank: int
    ap: dict[int, int]
    omega: float
    tamagawa_product: int
    sha: int
    torsion: int
    l1: float

    @property
    def a1(self): return self.ainvs[0]
    @property
    def a2(self): return self.ainvs[1]
    @property
    def a3(self): return self.ainvs[2]
    @property
    def a4(self): return self.ainvs[3]
    @property
    def a6(self): return self.ainvs[4]

    def good_at(self, p: int) -> bool:
        return self.conductor % p != 0

    def to_json(self) -> dict:
        out = {
            "label": self.label,
            "conductor": self.conductor,
            "ainvs": list(self.ainvs),
            "rank": self.rank,
            "ap": [self.ap[p] for p in AP_PRIMES] if set(AP_PRIMES) <= self.ap.keys()
            else {str(p): v for p, v in sorted(self.ap.items())},
            "omega": self.omega,
            "tamagawa_product": self.tamagawa_product,
            "sha": self.sha,
            "torsion": self.torsion,
            "l1": self.l1,
        }
        return out


class ValidationError(ValueError):
    pass


def record_from_dict(d: dict) -> CurveRecord:
    missing = [k for k in FIELDS if k not in d]
    if missing:
        raise ValidationError(f"missing fields {missing}")
    ap = d["ap"]
    if isinstance(ap, list):
        if len(ap) > len(AP_PRIMES):
            raise ValidationError(f"ap list longer than {len(AP_PRIMES)}")
        ap = dict(zip(AP_PRIMES, (int(v) for v in ap)))
    elif isinstance(ap, dict):
        ap = {int(k): int(v) for k, v in ap.items()}
    else:
        raise ValidationError("ap must be a list or an object")
    ainvs = tuple(int(a) for a in d["ainvs"])
    if len(ainvs) != 5:
        raise ValidationError("ainvs must have five entries")
    rec = CurveRecord(
        label=str(d["label"]),
        conductor=int(d["conductor"]),
        ainvs=ainvs,
        rank=int(d["rank"]),
        ap=ap,
        omega=float(d["omega"]),
        tamagawa_product=int(d["tamagawa_product"]),
        sha=int(d["sha"]),
        torsion=int(d["torsion"]),
        l1=float(d["l1"]),
    )
    validate(rec)
    return rec


def validate(rec: CurveRecord) -> None:
    if rec.conductor < 1:
        raise ValidationError("conductor must be positive")
    if rec.rank < 0:
        raise ValidationError("rank must be nonnegative")
    if not (rec.omega > 0 and math.isfinite(rec.omega)):
        raise ValidationError("omega must be a positive real")
    for name in ("tamagawa_product", "sha", "torsion"):
        if getattr(rec, name) < 1:
            raise ValidationError(f"{name} must be a positive integer")
    if rec.l1 < 0 or not math.isfinite(rec.l1):
        raise ValidationError("l1 must be a nonnegative real")
    for p, a in rec.ap.items():
        if rec.conductor % p:
            if a * a > 4 * p:
                raise ValidationError(f"Hasse bound fails at p = {p}: a_p = {a}")
        elif a not in (-1, 0, 1):
            raise ValidationError(f"bad prime p = {p} has a_p = {a} outside {{-1, 0, 1}}")


@dataclass
class IngestReport:
    records: list[CurveRecord]
    errors: list[tuple[int, str]] = field(default_factory=list)
    source: str = ""

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def _open_text(path: Union[str, os.PathLike]) -> io.TextIOBase:
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def ingest(path: Union[str, os.PathLike], format: str = "jsonl") -> IngestReport:
    """Read and validate curve records; bad rows are reported, not fatal."""
    if format == "cremona":
        return convert_cremona(path)
    if format != "jsonl":
        raise ValueError(f"unknown format {format!r}")
    try:
        fh = _open_text(path)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    recs, errs = [], []
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                recs.append(record_from_dict(json.loads(line)))
            except (ValueError, TypeError, KeyError) as exc:
                errs.append((lineno, str(exc)))
    if not recs and not errs:
        log.warning("%s contains no records", path)
    for lineno, msg in errs[:20]:
        log.warning("%s:%d rejected: %s", path, lineno, msg)
    return IngestReport(recs, errs, str(path))


def write_jsonl(records: Iterable[CurveRecord], path: Union[str, os.PathLike]) -> int:
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    n = 0
    with opener(path, "wt", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_json(), separators=(",", ":")) + "\n")
            n += 1
    return n


def bundled_fixture() -> Path:
    return Path(__file__).resolve().parent.parent / "data" / "cremona_fixture.jsonl.gz"


def load_fixture() -> IngestReport:
    return ingest(bundled_fixture())


# ---------------------------------------------------------------------------
# Cremona allbsd tables

_ALLBSD = re.compile(
    r"^\s*(\d+)\s+([a-z]+)\s+(\d+)\s+\[([-\d,\s]+)\]\s+(\d+)\s+(\d+)\s+(\d+)\s+(\S+)\s+(\S+)\s+(\S+)\s+(\S+)"
)


def parse_allbsd_line(line: str) -> dict:
    """N class num [a1,a2,a3,a4,a6] r |T| prod(c) Omega L^(r)(1)/r! Reg Sha."""
    m = _ALLBSD.match(line)
    if not m:
        raise ValidationError("not an allbsd row")
    N, cls, num, ai, r, T, c, om, lr, reg, sha = m.groups()
    return {
        "label": f"{N}{cls}{num}",
        "conductor": int(N),
        "ainvs": [int(x) for x in ai.split(",")],
        "rank": int(r),
        "torsion": int(T),
        "tamagawa_product": int(c),
        "omega": float(om),
        "l1": float(lr) if int(r) == 0 else 0.0,
        "sha": int(round(float(sha))),
    }


def computed_ap(ainvs, conductor: int, primes=AP_PRIMES) -> list[int]:
    """a_p at the record primes, counted on the (minimal) model.

    At a bad prime the same count, singular point included, gives +1 / -1 / 0
    for split / nonsplit / additive reduction.
    """
    return [ap_count(ainvs, p, allow_bad=True) for p in primes]


def convert_cremona(path, ap_path: Optional[Union[str, os.PathLike]] = None) -> IngestReport:
    """Convert an allbsd-style table; a_p come from an aplist file or are counted."""
    aps: dict[str, list[int]] = {}
    if ap_path:
        with _open_text(ap_path) as fh:
            for line in fh:
                parts = line.replace("[", " ").replace("]", " ").replace(",", " ").split()
                if len(parts) > 3:
                    aps[parts[0] + parts[1]] = [int(x) for x in parts[2:]]
    recs, errs = [], []
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            try:
                d = parse_allbsd_line(line)
                cls = re.match(r"(\d+[a-z]+)", d["label"]).group(1)
                if cls in aps:
                    d["ap"] = aps[cls][: len(AP_PRIMES)]
                else:
                    d["ap"] = computed_ap(d["ainvs"], d["conductor"])
                recs.append(record_from_dict(d))
            except (ValueError, BadReductionError) as exc:
                errs.append((lineno, str(exc)))
    return IngestReport(recs, errs, str(path))
