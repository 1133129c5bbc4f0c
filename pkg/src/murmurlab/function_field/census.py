"""Cyclotomic type census over all monic squarefree cubics D.

Translation t -> t + s is an automorphism of P^1 fixing infinity, so E_D and
E_{D(t+s)} share every invariant.  Each depressed class P(u) = u^3 + b u + c
stands for exactly q curves, and only q^2 classes need arithmetic.
"""
from __future__ import annotations

import json
import threading
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO, Union

import numpy as np

from . import fq
from .cyclotomic import CyclotomicType
from .family import (
    BadPlace, FFCurveRecord, _field, bad_fiber_analysis, char_sum_table, l_degree,
    resolve_lpoly, sha_of_curve, shift,
)

# the five Sha-defined types tabulated for q = 7 mod 12, in table order
TABLE_TYPES = ("Phi2^2", "Phi2^3", "Phi2^4", "Phi4^2", "Phi2^2*Phi6")


def class_power_sums(q: int, d: int) -> np.ndarray:
    """S_d for every depressed class: array indexed [b, c]."""
    F = _field(q, d)
    T = char_sum_table(q, d).astype(float).reshape(-1, q)  # last axis = F_q coordinate
    Tf = np.fft.fft(T, axis=1)
    out = np.empty((q, q), dtype=np.int64)
    t3 = F.cube_coords()
    for b in range(q):
        G = np.bincount(F.index(t3 + b * F.coords), minlength=F.size).astype(float).reshape(-1, q)
        # sum_y G[y] T[y + c] for every c in F_q at once
        corr = np.fft.ifft((np.conj(np.fft.fft(G, axis=1)) * Tf).sum(axis=0))
        out[b] = -np.rint(corr.real).astype(np.int64)
    return out


@dataclass
class ClassRecord:
    b: int
    c: int
    record: FFCurveRecord


@dataclass
class CensusResult:
    q: int
    counts: Counter
    sha: dict[str, set]
    classes: list[ClassRecord] = field(repr=False, default_factory=list)
    lazy_power_sums: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def count(self, label: str) -> int:
        return self.counts.get(label, 0)

    def table_row(self) -> dict[str, float]:
        return {t: self.count(t) / self.q for t in TABLE_TYPES}

    def rows(self) -> list[dict]:
        out = []
        for label, n in sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0])):
            shas = sorted(self.sha[label], key=str)
            out.append({"q": self.q, "type": label, "count": n, "count_over_q": n / self.q,
                        "sha": shas[0] if len(shas) == 1 else "|".join(map(str, shas))})
        return out

    def proportions(self) -> dict[str, float]:
        return {k: v / self.total for k, v in self.counts.items()}


class _LazySums:
    """Class power sums per degree, built on first use and shared by all classes."""

    def __init__(self, q: int):
        self.q = q
        self.tables: dict[int, np.ndarray] = {}
        self.lock = threading.Lock()

    def get(self, d: int) -> np.ndarray:
        with self.lock:
            if d not in self.tables:
                self.tables[d] = class_power_sums(self.q, d)
            return self.tables[d]


def _analyse_class(q: int, b: int, c: int, sums: _LazySums) -> tuple[FFCurveRecord, int]:
    P = fq.trim((c, b, 0, 1))
    facs, places, cinf = bad_fiber_analysis(P, q)
    m = l_degree(facs)
    lazy = 0

    def s_of(d):
        nonlocal lazy
        lazy += d > 2
        return int(sums.get(d)[b, c])

    L, typ = resolve_lpoly(m, s_of, q)
    rec = FFCurveRecord(q, P, facs, places, cinf, L, typ)
    rec.sha = sha_of_curve(rec)
    return rec, lazy


def type_census(q: int, workers: int = 1, keep_classes: bool = False) -> CensusResult:
    fq.check_q(q)
    sums = _LazySums(q)
    jobs = [(b, c) for b in range(q) for c in range(q)
            if fq.is_squarefree(fq.trim((c, b, 0, 1)), q)]

    def run(job):
        b, c = job
        return b, c, _analyse_class(q, b, c, sums)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    counts: Counter = Counter()
    shas: dict[str, set] = defaultdict(set)
    classes = []
    lazy = 0
    for b, c, (rec, nl) in results:  # deterministic job order
        counts[rec.type.label] += q
        shas[rec.type.label].add(rec.sha)
        lazy += nl
        if keep_classes:
            classes.append(ClassRecord(b, c, rec))
    return CensusResult(q, counts, dict(shas), classes, lazy)


def expand_class(rec: FFCurveRecord, q: int) -> Iterable[FFCurveRecord]:
    """The q curves D(t) = P(t + s) of a depressed class."""
    for s in range(q):
        D = shift(rec.D, s, q)
        facs = [(fq.monic(shift(p, s, q), q), m) for p, m in rec.disc_factorization]
        places = [BadPlace(fq.monic(shift(bp.pi, s, q), q), bp.m, bp.split, bp.tamagawa)
                  for bp in rec.bad_places]
        yield FFCurveRecord(q, D, facs, places, rec.c_infinity, rec.L_unitized, rec.type, rec.sha)


def write_per_curve(result: CensusResult, fh: TextIO) -> int:
    n = 0
    for cls in result.classes:
        for rec in expand_class(cls.record, result.q):
            fh.write(json.dumps(rec.to_json(), separators=(",", ":")) + "\n")
            n += 1
    return n


# ---------------------------------------------------------------------------
# cross-q checks


@dataclass
class QuasiPolyReport:
    phi2sq_exact: dict[int, bool]
    phi2cube: dict[int, tuple[float, Optional[float]]]  # q -> (observed N/q, formula or None)
    class_fits: dict[tuple[int, str], np.ndarray]
    mismatches: list[str]


def phi2cube_formula(q: int) -> float:
    return (q - 7) / 4


def quasi_polynomial_check(censuses: dict[int, Union[CensusResult, dict[str, float]]]) -> QuasiPolyReport:
    """Compare N/q across q with the closed forms; fit quadratics per class mod 96.

    Accepts CensusResult objects or plain {type: N/q} rows (e.g. tabulated data).
    """
    def row(v):
        return v.table_row() if isinstance(v, CensusResult) else v

    rows = {q: row(v) for q, v in censuses.items()}
    mism = []
    phi2sq = {}
    phi2c = {}
    for q, r in sorted(rows.items()):
        phi2sq[q] = r.get("Phi2^2", 0) == 1
        if not phi2sq[q]:
            mism.append(f"q={q}: N(Phi2^2)/q = {r.get('Phi2^2')} != 1")
        f = phi2cube_formula(q)
        phi2c[q] = (r.get("Phi2^3", 0), f)
        if abs(r.get("Phi2^3", 0) - f) > 1e-9:
            mism.append(f"q={q}: N(Phi2^3)/q = {r.get('Phi2^3')} != (q-7)/4 = {f}")
    fits = {}
    by_class = defaultdict(list)
    for q in rows:
        by_class[q % 96].append(q)
    for r, qs in by_class.items():
        if len(qs) < 3:
            continue
        ks = np.array([(q - r) / 96 for q in sorted(qs)])
        for t in TABLE_TYPES:
            ys = np.array([rows[q].get(t, 0) for q in sorted(qs)])
            fits[(r, t)] = np.polyfit(ks, ys, 2)
    return QuasiPolyReport(phi2sq, phi2c, fits, mism)


@dataclass
class DensityResult:
    value: Optional[float]
    types: list[str]
    empty: bool = False


def murmuration_density(census: CensusResult, sha_value: int, d: int) -> DensityResult:
    """delta_s(d) = sum N_lambda p_d(lambda) / sum N_lambda over types with Sha = s."""
    num = 0
    den = 0
    used = []
    for label, n in census.counts.items():
        if census.sha.get(label) == {sha_value}:
            num += n * CyclotomicType.parse(label).power_sum(d)
            den += n
            used.append(label)
    if den == 0:
        return DensityResult(None, [], empty=True)
    return DensityResult(num / den, sorted(used))


def sha_type_invariance(census: CensusResult) -> dict[str, bool]:
    return {label: len(s) == 1 for label, s in census.sha.items()}
