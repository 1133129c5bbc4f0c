"""Conditional period-trace statistics over curve records."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .arith import AP_PRIMES, adjoint_feature
from .records import CurveRecord

# conductor windows of the flatness table (upper bound exclusive)
PAPER_WINDOWS = ((0, 5_000), (5_000, 15_000), (15_000, 35_000), (35_000, 65_000), (65_000, math.inf))
SMALL_PRIMES = (3, 5, 7, 11, 13)


@dataclass
class CondStatResult:
    p: int
    window: tuple[float, float]
    stratum: str
    n: int
    correlation: float
    se: float
    coefficients: tuple[float, ...] = ()
    extra: dict = field(default_factory=dict)

    def z(self) -> float:
        return self.correlation / self.se


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, float) - np.mean(x)
    y = np.asarray(y, float) - np.mean(y)
    den = math.sqrt(float(x @ x) * float(y @ y))
    if den == 0:
        raise ValueError("zero variance")
    return float(x @ y) / den


def select(records: Sequence[CurveRecord], p: Optional[int] = None, window=(0, math.inf),
           sha: Optional[int] = None, torsion: Optional[int] = None,
           include_bad: bool = False) -> list[CurveRecord]:
    lo, hi = window
    out = []
    for r in records:
        if r.rank != 0 or not (lo <= r.conductor < hi):
            continue
        if p is not None and not include_bad and r.conductor % p == 0:
            continue
        if sha is not None and r.sha != sha:
            continue
        if torsion is not None and r.torsion != torsion:
            continue
        out.append(r)
    return out


def _arrays(recs, p):
    a = np.array([r.ap[p] for r in recs], float)
    L = np.array([r.l1 for r in recs], float)
    om = np.array([r.omega for r in recs], float)
    return a, L, om


def residualize(y: np.ndarray, regressors: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray, float]:
    """OLS of y on (1, regressors); returns residual, coefficients and R^2."""
    X = np.column_stack([np.ones_like(y)] + [np.asarray(r, float) for r in regressors])
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise ValueError("degenerate regressor")
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    res = y - X @ beta
    tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1 - float(res @ res) / tss if tss > 0 else 0.0
    return res, beta, r2


def adjusted_correlation(records: Sequence[CurveRecord], p: int, window=(0, math.inf),
                         sha: Optional[int] = None, torsion: Optional[int] = None,
                         include_bad: bool = False,
                         extra_regressors: Sequence[Callable[[CurveRecord], float]] = (),
                         min_n: int = 30, label: str = "rank0") -> CondStatResult:
    """Pearson correlation of Omega with the residual of a_p regressed on L(1)."""
    recs = select(records, p, window, sha, torsion, include_bad)
    n = len(recs)
    if n < min_n:
        raise ValueError(f"only {n} curves for p = {p} in window {window}; need {min_n}")
    a, L, om = _arrays(recs, p)
    if np.ptp(L) == 0:
        raise ValueError("degenerate regressor: L(1) is constant")
    regs = [L] + [np.array([f(r) for r in recs], float) for f in extra_regressors]
    res, beta, r2 = residualize(a, regs)
    corr = pearson(res, om)
    return CondStatResult(p, tuple(window), label, n, corr, 1 / math.sqrt(n), tuple(beta), {"r2": r2})


def window_table(records, windows=PAPER_WINDOWS, primes=SMALL_PRIMES, sha: Optional[int] = 1):
    """Adjusted correlation averaged over primes, per conductor window."""
    rows = []
    for w in windows:
        vals, ns = [], []
        for p in primes:
            try:
                r = adjusted_correlation(records, p, w, sha=sha)
            except ValueError:
                continue
            vals.append(r.correlation)
            ns.append(r.n)
        rows.append({"window": w, "n": max(ns) if ns else 0,
                     "mean_corr": float(np.mean(vals)) if vals else float("nan"),
                     "primes": len(vals)})
    return rows


@dataclass
class DecayFit:
    C: float
    primes: list[int]
    correlations: list[float]
    residuals: list[float]


def fit_decay(primes: Sequence[int], corrs: Sequence[float]) -> DecayFit:
    """Least squares for corr(p) = C / sqrt(p)."""
    x = 1 / np.sqrt(np.asarray(primes, float))
    y = np.asarray(corrs, float)
    C = float(x @ y / (x @ x))
    return DecayFit(C, list(primes), list(map(float, y)), list(map(float, y - C * x)))


def prime_decay_fit(records, primes: Sequence[int] = tuple(AP_PRIMES[1:25]), sha: Optional[int] = 1,
                    window=(0, math.inf)) -> DecayFit:
    ps, cs = [], []
    for p in primes:
        try:
            r = adjusted_correlation(records, p, window, sha=sha)
        except ValueError:
            continue
        ps.append(p)
        cs.append(r.correlation)
    if len(ps) < 10:
        raise ValueError("need at least 10 primes with valid correlations")
    return fit_decay(ps, cs)


def equal_count_bins(values: np.ndarray, labels: Sequence[str], k: int) -> list[np.ndarray]:
    """Equal-count bins by value, ties broken by label."""
    order = np.lexsort((np.asarray(labels), np.asarray(values)))
    return np.array_split(order, k)


def sign_flip_deciles(records, p: int = 3, k: int = 10) -> list[dict]:
    """Corr(a_p, 1/prod c) and Corr(a_p, Omega) by L(1) decile at Sha = |T| = 1."""
    recs = select(records, p, sha=1, torsion=1)
    a, L, om = _arrays(recs, p)
    inv_c = np.array([1 / r.tamagawa_product for r in recs])
    rows = []
    for i, idx in enumerate(equal_count_bins(L, [r.label for r in recs], k), start=1):
        n = len(idx)
        row = {"decile": i, "median_L": float(np.median(L[idx])), "n": n, "se": 1 / math.sqrt(n)}
        for key, y in (("corr_tamagawa", inv_c), ("corr_omega", om)):
            try:
                row[key] = pearson(a[idx], y[idx])
            except ValueError:
                row[key] = float("nan")
        rows.append(row)
    return rows


def tamagawa_ratio(records, bins: int, p: int = 3) -> float:
    """Ratio of the count-weighted within-bin Tamagawa and Omega correlations."""
    recs = select(records, p, sha=1, torsion=1)
    a, L, om = _arrays(recs, p)
    inv_c = np.array([1 / r.tamagawa_product for r in recs])
    num = den = 0.0
    for idx in equal_count_bins(L, [r.label for r in recs], bins):
        if len(idx) < 3:
            continue
        try:
            ct = pearson(a[idx], inv_c[idx])
            co = pearson(a[idx], om[idx])
        except ValueError:
            continue
        num += len(idx) * ct
        den += len(idx) * co
    return num / den


# ---------------------------------------------------------------------------
# grouped cross-validation


def feature_matrix(recs, primes=tuple(AP_PRIMES[:25]), quadratic=False, adjoint=False) -> np.ndarray:
    A = np.array([[r.ap[p] for p in primes] for r in recs], float)
    cols = [A / np.sqrt(primes)]
    if quadratic:
        cols.append(A**2 / np.asarray(primes, float))
    if adjoint:
        cols.append(np.column_stack([adjoint_feature(p, A[:, j]) for j, p in enumerate(primes)]))
    return np.hstack(cols)


@dataclass
class CVResult:
    target: str
    n: int
    mse_base: float
    mse_aug: float
    r2_base: float
    r2_aug: float
    t_stat: float

    @property
    def delta_mse_pct(self) -> float:
        return 100 * (self.mse_base - self.mse_aug) / self.mse_base

    @property
    def delta_r2(self) -> float:
        return self.r2_aug - self.r2_base


def _oof_predictions(X, y, groups, folds):
    from sklearn.linear_model import LinearRegression
    from sklearn.model_selection import GroupKFold

    pred = np.full_like(y, np.nan)
    for train, test in GroupKFold(n_splits=folds).split(X, y, groups):
        if np.var(y[train]) == 0:
            continue
        pred[test] = LinearRegression().fit(X[train], y[train]).predict(X[test])
    return pred


def grouped_cv_arrays(X_base, X_aug, y, groups, folds=5, target="") -> CVResult:
    pb = _oof_predictions(X_base, y, groups, folds)
    pa = _oof_predictions(X_aug, y, groups, folds)
    ok = ~(np.isnan(pb) | np.isnan(pa))
    y, pb, pa = y[ok], pb[ok], pa[ok]
    eb, ea = (y - pb) ** 2, (y - pa) ** 2
    tss = float(((y - y.mean()) ** 2).mean())
    d = eb - ea
    t = float(d.mean() / (d.std(ddof=1) / math.sqrt(len(d)))) if d.std() > 0 else 0.0
    return CVResult(target, int(ok.sum()), float(eb.mean()), float(ea.mean()),
                    1 - float(eb.mean()) / tss, 1 - float(ea.mean()) / tss, t)


def grouped_cv(records, target: str = "log_tamagawa", quadratic: bool = False, folds: int = 5,
               group_by: str = "conductor") -> CVResult:
    """Out-of-fold gain from adding the adjoint feature to an a_p basis.

    Folds never split a conductor (or isogeny-class label prefix) across train and test.
    """
    recs = [r for r in records if r.rank == 0]
    if target == "log_tamagawa":
        y = np.log([r.tamagawa_product for r in recs])
    elif target == "log_sha":
        y = np.log([r.sha for r in recs])
    else:
        raise ValueError(f"unknown target {target!r}")
    if group_by == "conductor":
        groups = np.array([r.conductor for r in recs])
    elif group_by == "isogeny":
        groups = np.array([r.label.rstrip("0123456789") for r in recs])
    else:
        raise ValueError(f"unknown grouping {group_by!r}")
    Xb = feature_matrix(recs, quadratic=quadratic)
    Xa = feature_matrix(recs, quadratic=quadratic, adjoint=True)
    return grouped_cv_arrays(Xb, Xa, y, groups, folds, target)


# ---------------------------------------------------------------------------
# controls


def controls_suite(records, p: int = 3, windows=PAPER_WINDOWS, seed: int = 0) -> dict:
    """Adjusted correlation under the five controls plus a shuffled-Omega placebo."""
    base = adjusted_correlation(records, p, sha=1)
    out = {"baseline": base}
    out["conductor_windows"] = []
    for w in windows:
        try:
            out["conductor_windows"].append(adjusted_correlation(records, p, w, sha=1))
        except ValueError:
            pass
    out["l1_regression"] = base
    afe = adjusted_correlation(records, p, sha=1, extra_regressors=[
        lambda r: r.l1 * math.log(p) / math.log(r.conductor)])
    afe.extra["r2_increase"] = afe.extra["r2"] - base.extra["r2"]
    out["afe_regressor"] = afe
    out["including_bad_primes"] = adjusted_correlation(records, p, sha=1, include_bad=True)
    out["torsion_trivial"] = adjusted_correlation(records, p, sha=1, torsion=1)
    out["torsion_regressor"] = adjusted_correlation(records, p, sha=1, extra_regressors=[
        lambda r: r.torsion**2])
    # placebo: permute Omega among the selected curves
    recs = select(records, p, sha=1)
    a, L, om = _arrays(recs, p)
    res, _, _ = residualize(a, [L])
    rng = np.random.default_rng(seed)
    placebo = [pearson(res, rng.permutation(om)) for _ in range(20)]
    out["placebo"] = {"n": len(recs), "max_abs_z": float(np.max(np.abs(placebo)) * math.sqrt(len(recs)))}
    return out
