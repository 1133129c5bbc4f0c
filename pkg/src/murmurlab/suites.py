"""Tolerance suites shared by the command line and the acceptance tests.

Each suite returns a ``SuiteResult``: the asserted checks plus the tables
behind them, ready to be written as CSV.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import analytic_checks as ac
from . import bessel_barrier as bb
from . import sato_tate as st

# reference values that the suites assert against
FF_TABLE = {
    7: (1, 0, 0, 2, 4),
    19: (1, 3, 0, 23, 58),
    31: (1, 6, 1, 56, 141),
    43: (1, 9, 4, 107, 291),
    67: (1, 15, 15, 287, 742),
    79: (1, 18, 21, 380, 994),
    103: (1, 24, 42, 668, 1768),
    127: (1, 27, 67, 1004, 2673),
    139: (1, 33, 81, 1205, 3172),
    151: (1, 36, 93, 1388, 3694),
    163: (1, 39, 114, 1619, 4324),
    199: (1, 48, 177, 2492, 6592),
    211: (1, 51, 198, 2753, 7312),
    223: (1, 54, 229, 3122, 8265),
}
ST_DECILES = {1: (0.056, 0.298), 3: (0.167, 0.165), 5: (0.327, 0.090),
              8: (0.924, 0.008), 9: (1.52, -0.013), 10: (3.61, -0.080)}
SIGN_FLIP_TAMAGAWA = (0.024, 0.047, 0.065, 0.079, 0.087, 0.081, 0.049, 0.037, 0.080, -0.050)
WINDOW_VALUES = (0.059, 0.047, 0.048, 0.049, 0.043)


@dataclass
class Check:
    name: str
    value: float
    target: str
    passed: bool
    asserted: bool = True

    def line(self) -> str:
        tag = ("PASS" if self.passed else "FAIL") if self.asserted else "INFO"
        return f"{tag}  {self.name}: {self.value:.6g} (target {self.target})"


@dataclass
class SuiteResult:
    name: str
    checks: list[Check] = field(default_factory=list)
    tables: dict[str, list[dict]] = field(default_factory=dict)
    seconds: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed or not c.asserted for c in self.checks)

    def add(self, name: str, value: float, target: str, passed: bool) -> Check:
        c = Check(name, float(value), target, bool(passed))
        self.checks.append(c)
        return c


def within(value: float, target: float, tol: float) -> bool:
    return abs(value - target) <= tol


# ---------------------------------------------------------------------------


def bessel_suite(points: int = 10_000) -> SuiteResult:
    t0 = time.time()
    res = SuiteResult("bessel")
    zs = np.logspace(-3, 3, points)
    ph = np.array([bb.phi(z) for z in zs])
    res.add("phi > 0 on log grid [1e-3, 1e3]", float(ph.min()), "> 0", bool(np.all(ph > 0)))
    small = bb.cov_x_x2(1e-3) / 1e-3
    res.add("cov(1e-3)/1e-3", small, "1/16 +- 1%", within(small, 1 / 16, 0.01 / 16))
    large = bb.cov_x_x2(100.0) * 100.0**2
    res.add("cov(100)*100^2", large, "1.5 +- 5%", within(large, 1.5, 0.075))
    worst = math.inf
    arg = None
    grid = []
    for p in bb.primes_upto(97):
        for lam in (0.25, 0.5, 1, 2, 4):
            v = bb.euler_tilt_cov(p, lam)
            grid.append({"p": p, "lambda": lam, "euler_tilt_cov": v})
            if v < worst:
                worst, arg = v, (p, lam)
    res.add(f"min euler_tilt_cov over p <= 97 (at {arg})", worst, "> 0", worst > 0)
    sample = np.logspace(-3, 3, 61)
    res.tables["bessel_grid"] = [
        {"lambda": float(z), "phi": bb.phi(z), "cov_x_x2": bb.cov_x_x2(z),
         "lambda2_cov": z * z * bb.cov_x_x2(z)} for z in sample]
    res.tables["euler_tilt"] = grid
    res.seconds = time.time() - t0
    return res


def st_suite(config: Optional[st.STModelConfig] = None) -> SuiteResult:
    t0 = time.time()
    cfg = config or st.STModelConfig()
    res = SuiteResult("st-model")
    table = st.conditional_cov_table(st.run_model(cfg))
    rows = table.to_csv_rows()
    res.tables["st_deciles"] = rows
    if isinstance(cfg.bins, int) and cfg.bins == 10:
        first, last = table.rows[0].corr, table.rows[-1].corr
        res.add("decile 1 C(c)/sqrt(p)", first, "+0.298 +- 0.02", within(first, 0.298, 0.02))
        res.add("decile 10 C(c)/sqrt(p)", last, "-0.080 +- 0.02", within(last, -0.080, 0.02))
    wm = table.weighted_mean()
    res.add("density-weighted mean", wm, "+0.091 +- 0.015", within(wm, 0.091, 0.015))
    thr = st.sign_change_threshold(table)
    ok = thr.found and thr.bracket[0] <= 1.5 <= thr.bracket[1]
    res.add("sign-change bracket contains 1.5", thr.c_star if thr.found else float("nan"),
            "bracket contains 1.5", ok)
    res.notes.append(str(thr))
    res.seconds = time.time() - t0
    return res


def ff_suite(qs: Sequence[int] = (7, 19, 31, 43), workers: int = 1, per_curve=None) -> SuiteResult:
    from .function_field import TABLE_TYPES, type_census, write_per_curve

    t0 = time.time()
    res = SuiteResult("ff-census")
    rows, table = [], []
    for q in qs:
        tq = time.time()
        cen = type_census(q, workers=workers, keep_classes=per_curve is not None)
        if per_curve is not None:
            write_per_curve(cen, per_curve)
        rows += cen.rows()
        got = tuple(cen.table_row()[t] for t in TABLE_TYPES)
        table.append({"q": q, "q_mod_96": q % 96, **dict(zip(TABLE_TYPES, got)),
                      "seconds": round(time.time() - tq, 2)})
        if q in FF_TABLE:
            exp = FF_TABLE[q]
            res.add(f"q={q} table row", sum(abs(a - b) for a, b in zip(got, exp)),
                    f"exact {exp}", got == exp)
        res.add(f"q={q} sum N = q^3 - q^2", cen.total, str(q**3 - q**2), cen.total == q**3 - q**2)
        non = [t for t in TABLE_TYPES if cen.sha.get(t, {1}) != {1}]
        res.add(f"q={q} Sha = 1 for the five table types", len(non), "0 exceptions", not non)
        if non:
            res.notes.append(f"q={q}: Sha != 1 for {', '.join(f'{t} ({sorted(cen.sha[t])})' for t in non)}")
        varying = [t for t, s in cen.sha.items() if len(s) > 1]
        res.add(f"q={q} Sha constant within type", len(varying), "0 types", not varying)
    # Kronecker factorization is a hard invariant: type_census raises on any failure,
    # so reaching this point means every L-polynomial factored
    res.add("cyclotomic factorization failures", 0, "0", True)
    res.tables["ff_table"] = table
    res.tables["ff_types"] = rows
    res.seconds = time.time() - t0
    return res


def checks_suite() -> SuiteResult:
    t0 = time.time()
    res = SuiteResult("checks")
    w = ac.weil_scan(20, 20, 1000, strict=False)
    res.add("Weil violations (m,n <= 20, c <= 1000)", len(w.violations), "0", w.ok)
    md = ac.mollifier_diagonal(10**6)
    res.add("mollifier_diagonal(1e6)", md, "15/pi^2 +- 1e-5", within(md, 15 / math.pi**2, 1e-5))
    deltas = []
    for N in (100, 1000, 10_000):
        r = ac.petersson_offdiagonal(1, 1, N)
        deltas.append({"N": N, "delta": r.value, "abs_delta": abs(r.value), "tail_bound": r.error_bound,
                       "terms": r.terms, "scaled_N^1.5": abs(r.value) * N**1.5})
    mags = [d["abs_delta"] for d in deltas]
    res.add("|Delta(1,1;N)| decreasing over N = 1e2, 1e3, 1e4", mags[-1],
            "strictly decreasing", all(a > b for a, b in zip(mags, mags[1:])))
    res.tables["weil"] = [{"checked": w.checked, "violations": len(w.violations),
                           "max_ratio": w.max_ratio, "argmax": str(w.argmax)}]
    res.tables["petersson"] = deltas
    res.tables["mollifier"] = [{"D": D, "value": ac.mollifier_diagonal(D),
                                "gap": 15 / math.pi**2 - ac.mollifier_diagonal(D)}
                               for D in (10, 100, 1000, 10**4, 10**5, 10**6)]
    res.seconds = time.time() - t0
    return res


# ---------------------------------------------------------------------------
# empirics


def empirics_fixture_suite(records, verify_sample: int = 500, seed: int = 0) -> SuiteResult:
    """BSD identity, a_p recomputation, L(1) and the p = 3 adjusted correlation."""
    from .rational_curves import arith, records as rc, stats

    t0 = time.time()
    res = SuiteResult("empirics")
    rank0 = [r for r in records if r.rank == 0]
    dev = max(abs(r.l1 - r.omega * r.tamagawa_product * r.sha / r.torsion**2) for r in rank0)
    res.add("BSD identity max deviation", dev, "< 1e-6", dev < 1e-6)
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(rank0), size=min(verify_sample, len(rank0)), replace=False)
    sample = [rank0[i] for i in sorted(pick)]
    mism = total = 0
    worst_l = 0.0
    for r in sample:
        comp = rc.computed_ap(r.ainvs, r.conductor)
        total += len(comp)
        mism += sum(c != r.ap[p] for c, p in zip(comp, arith.AP_PRIMES))
        worst_l = max(worst_l, abs(arith.l_value(r.ap, r.conductor) - r.l1))
    res.add(f"recomputed a_p match ({len(sample)} curves x 500 primes)", 100 * (1 - mism / total),
            "100%", mism == 0)
    res.add(f"l_value vs stored L(1) ({len(sample)} curves)", worst_l, "< 1e-6", worst_l < 1e-6)
    adj = stats.adjusted_correlation(records, 3)
    res.add("p=3 adjusted correlation / SE", adj.z(), "corr > 0 and > 3 SE",
            adj.correlation > 0 and adj.z() > 3)
    res.notes.append(f"p=3 adjusted correlation {adj.correlation:+.4f} (n = {adj.n}, SE {adj.se:.4f})")
    res.tables["adjusted_p3"] = [{"n": adj.n, "corr": adj.correlation, "se": adj.se}]
    res.seconds = time.time() - t0
    return res


def sign_flip_table(records) -> list[dict]:
    from .rational_curves import stats
    return stats.sign_flip_deciles(records, 3)


def empirics_full_suite(records, assert_full: bool = True) -> SuiteResult:
    """Full-database targets; meaningful only on the complete Cremona tables."""
    from .rational_curves import stats

    t0 = time.time()
    res = SuiteResult("empirics-full")
    adj = stats.adjusted_correlation(records, 3)
    res.add("p=3 adjusted correlation", adj.correlation, "0.097 +- 0.01", within(adj.correlation, 0.097, 0.01))
    fit = stats.prime_decay_fit(records, sha=None)
    res.add("decay fit C", fit.C, "0.166 +- 0.02", within(fit.C, 0.166, 0.02))
    flip = sign_flip_table(records)
    d10 = flip[-1]["corr_tamagawa"]
    res.add("sign-flip decile 10 Tamagawa corr", d10, "-0.050 +- 0.02", within(d10, -0.050, 0.02))
    wins = stats.window_table(records, sha=None)
    for row, ref in zip(wins, WINDOW_VALUES):
        res.add(f"window {row['window']}", row["mean_corr"], f"{ref} +- 0.01",
                within(row["mean_corr"], ref, 0.01))
    cv_t = stats.grouped_cv(records, "log_tamagawa")
    cv_s = stats.grouped_cv(records, "log_sha")
    res.add("grouped CV delta R^2 log prod c", cv_t.delta_r2, "+0.046 +- 0.01", within(cv_t.delta_r2, 0.046, 0.01))
    res.add("grouped CV delta R^2 log Sha", cv_s.delta_r2, "< 0.005", cv_s.delta_r2 < 0.005)
    if not assert_full:
        for c in res.checks:
            c.asserted = False
        res.notes.append("full-database tolerances reported but not asserted")
    res.tables["sign_flip"] = flip
    res.tables["decay_fit"] = [{"p": p, "corr": c, "fit": fit.C / math.sqrt(p), "residual": e}
                               for p, c, e in zip(fit.primes, fit.correlations, fit.residuals)]
    res.tables["windows"] = [{**w, "window": f"{w['window'][0]}-{w['window'][1]}"} for w in wins]
    res.tables["cv_split"] = [
        {"target": c.target, "n": c.n, "mse_base": c.mse_base, "mse_aug": c.mse_aug,
         "delta_mse_pct": c.delta_mse_pct, "delta_r2": c.delta_r2, "t": c.t_stat} for c in (cv_t, cv_s)]
    res.seconds = time.time() - t0
    return res
