"""Independent Sato-Tate Monte Carlo for the conditional period-trace covariance.

Each sample draws one Satake angle per prime from (2/pi) sin^2(theta) d theta,
forms the central value L = prod_l L_l(f, 1; theta_l) and the period proxy
Omega = prod_l L_l(Ad; theta_l)^(-1), and keeps (cos theta_p, L, Omega) for the
target prime p.  Conditioning on L is done by binning.

Random streams are keyed by (seed, chunk index, prime), so a run is bit-for-bit
reproducible whatever the worker count, and runs over nested prime lists share
the draws of their common primes.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from .bessel_barrier import is_prime, primes_upto

CDF_GRID_POINTS = 100_001
DEFAULT_CHUNK = 1 << 17


class ResourceError(MemoryError):
    """Requested run would exceed the configured memory budget."""


def first_primes(n: int) -> list[int]:
    bound = 30
    while True:
        ps = primes_upto(bound)
        if len(ps) >= n:
            return ps[:n]
        bound *= 2


@dataclass
class STModelConfig:
    primes: list[int] = field(default_factory=lambda: first_primes(25))
    samples: int = 2_000_000
    target_prime: int = 3
    bins: Union[int, list[float]] = 10
    seed: int = 20260301
    chunk_size: int = DEFAULT_CHUNK
    workers: int = 1
    memory_budget_bytes: int = 2 * 1024**3

    def __post_init__(self):
        self.primes = [int(p) for p in self.primes]
        if len(set(self.primes)) != len(self.primes):
            raise ValueError("primes must be distinct")
        if not all(is_prime(p) for p in self.primes):
            raise ValueError("every entry of primes must be prime")
        if self.target_prime not in self.primes:
            raise ValueError(f"target prime {self.target_prime} not in primes")
        if self.samples < 1:
            raise ValueError("samples must be positive")
        nbins = self.bins if isinstance(self.bins, int) else len(self.bins) - 1
        if nbins < 1:
            raise ValueError("need at least one bin")
        if self.samples < 10 * nbins:
            raise ValueError("samples must be at least 10 per bin")
        if not isinstance(self.bins, int):
            edges = [float(e) for e in self.bins]
            if any(b <= a for a, b in zip(edges, edges[1:])):
                raise ValueError("bin edges must be strictly increasing")
            self.bins = edges

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class STSampleBatch:
    cos_theta: np.ndarray
    l_value: np.ndarray
    omega_proxy: np.ndarray
    config: STModelConfig

    def __len__(self) -> int:
        return len(self.cos_theta)

    @property
    def a_p(self) -> np.ndarray:
        return 2.0 * math.sqrt(self.config.target_prime) * self.cos_theta


# ---------------------------------------------------------------------------
# sampling and local factors


def st_cdf(theta):
    """CDF of (2/pi) sin^2 theta on [0, pi]."""
    theta = np.asarray(theta, dtype=float)
    return (theta - np.sin(theta) * np.cos(theta)) / np.pi


@lru_cache(maxsize=1)
def _inverse_cdf_grid() -> tuple[np.ndarray, np.ndarray]:
    theta = np.linspace(0.0, np.pi, CDF_GRID_POINTS)
    return st_cdf(theta), theta


def sample_theta(rng: np.random.Generator, size=None):
    """Draw Satake angles from the Sato-Tate measure by inverse CDF."""
    F, theta = _inverse_cdf_grid()
    u = rng.random(size)
    return np.interp(u, F, theta)


def euler_factor_f(p: float, theta):
    """L_p(f, 1; theta) = |1 - e^{i theta}/sqrt(p)|^{-2}."""
    return 1.0 / (1.0 - 2.0 * np.cos(theta) / math.sqrt(p) + 1.0 / p)


def euler_factor_f_complex(p: float, theta):
    return 1.0 / np.abs(1.0 - np.exp(1j * np.asarray(theta)) / math.sqrt(p)) ** 2


def euler_factor_ad(p: float, theta):
    """Adjoint local factor without its theta-independent zeta part."""
    return 1.0 / (1.0 - 2.0 * np.cos(2.0 * theta) / p + 1.0 / (p * p))


def l_value_bounds(primes: Sequence[int]) -> tuple[float, float]:
    lo = math.prod(1.0 / (1.0 + 2.0 / math.sqrt(p) + 1.0 / p) for p in primes)
    hi = math.prod(1.0 / (1.0 - 2.0 / math.sqrt(p) + 1.0 / p) for p in primes)
    return lo, hi


def _chunk_rng(seed: int, chunk: int, prime: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk, prime)))


def _run_chunk(cfg: STModelConfig, chunk: int, start: int, stop: int):
    n = stop - start
    log_l = np.zeros(n)
    log_ad = np.zeros(n)
    cos_target = None
    for p in cfg.primes:
        theta = sample_theta(_chunk_rng(cfg.seed, chunk, p), n)
        c = np.cos(theta)
        if p == cfg.target_prime:
            cos_target = c
        log_l -= np.log1p(-2.0 * c / math.sqrt(p) + 1.0 / p)
        log_ad -= np.log1p(-2.0 * np.cos(2.0 * theta) / p + 1.0 / (p * p))
    return cos_target, np.exp(log_l), np.exp(-log_ad)


def run_model(config: STModelConfig) -> STSampleBatch:
    """Sample the independent Sato-Tate model, chunk by chunk."""
    need = 3 * 8 * config.samples
    if need > config.memory_budget_bytes:
        raise ResourceError(
            f"{config.samples} samples need ~{need / 2**20:.0f} MiB of output, "
            f"over the {config.memory_budget_bytes / 2**20:.0f} MiB budget"
        )
    bounds = list(range(0, config.samples, config.chunk_size)) + [config.samples]
    jobs = [(i, a, b) for i, (a, b) in enumerate(zip(bounds, bounds[1:]))]
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as ex:
            parts = list(ex.map(lambda j: _run_chunk(config, *j), jobs))
    else:
        parts = [_run_chunk(config, *j) for j in jobs]
    cos_t = np.concatenate([p[0] for p in parts])
    lv = np.concatenate([p[1] for p in parts])
    om = np.concatenate([p[2] for p in parts])
    return STSampleBatch(cos_t, lv, om, config)


# ---------------------------------------------------------------------------
# conditional statistics


@dataclass
class CovRow:
    bin: int
    median_l: float
    count: int
    cov: float
    corr: float
    se: float
    mean_cos: float
    mean_omega: float
    flagged: bool = False

    @property
    def c_over_sqrt_p(self) -> float:
        # scale-free form of C(c)/sqrt(p): the within-bin correlation of a_p and Omega
        return self.corr


@dataclass
class ConditionalCovTable:
    target_prime: int
    rows: list[CovRow]
    total: int

    @property
    def valid_rows(self) -> list[CovRow]:
        return [r for r in self.rows if not r.flagged]

    def weighted_mean(self) -> float:
        rows = self.valid_rows
        n = sum(r.count for r in rows)
        return sum(r.count * r.corr for r in rows) / n

    def to_csv_rows(self) -> list[dict]:
        return [
            {
                "bin": r.bin,
                "median_L": r.median_l,
                "count": r.count,
                "cov_cos_omega": r.cov,
                "corr": r.corr,
                "C_over_sqrt_p": r.c_over_sqrt_p,
                "se": r.se,
                "flagged": int(r.flagged),
            }
            for r in self.rows
        ]


def _bin_indices(l_value: np.ndarray, bins) -> list[np.ndarray]:
    if isinstance(bins, int):
        order = np.argsort(l_value, kind="stable")
        return np.array_split(order, bins)
    edges = np.asarray(bins, dtype=float)
    which = np.searchsorted(edges, l_value, side="right") - 1
    return [np.nonzero(which == k)[0] for k in range(len(edges) - 1)]


def _two_pass(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    n = len(x)
    mx = x.sum() / n
    my = y.sum() / n
    dx = x - mx
    dy = y - my
    sxy = float(np.dot(dx, dy))
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    cov = sxy / (n - 1)
    corr = sxy / math.sqrt(sxx * syy) if sxx > 0 and syy > 0 else float("nan")
    return cov, corr, mx


def conditional_cov_table(batch: STSampleBatch, config: Optional[STModelConfig] = None) -> ConditionalCovTable:
    cfg = config or batch.config
    rows = []
    for k, idx in enumerate(_bin_indices(batch.l_value, cfg.bins), start=1):
        n = len(idx)
        if n < 2:
            med = float(np.median(batch.l_value[idx])) if n else float("nan")
            rows.append(CovRow(k, med, n, float("nan"), float("nan"), float("nan"),
                               float("nan"), float("nan"), flagged=True))
            continue
        x = batch.cos_theta[idx]
        y = batch.omega_proxy[idx]
        cov, corr, mx = _two_pass(x, y)
        se = (1.0 - corr * corr) / math.sqrt(n - 1) if n > 1 else float("nan")
        rows.append(CovRow(k, float(np.median(batch.l_value[idx])), n, cov, corr, se,
                           mx, float(y.mean())))
    return ConditionalCovTable(cfg.target_prime, rows, len(batch))


@dataclass
class Threshold:
    found: bool
    c_star: Optional[float] = None
    bracket: Optional[tuple[float, float]] = None

    def __str__(self):
        if not self.found:
            return "no sign change"
        return f"c* = {self.c_star:.4f} in [{self.bracket[0]:.4f}, {self.bracket[1]:.4f}]"


def sign_change_threshold(table: Union[ConditionalCovTable, Sequence[tuple[float, float]]]) -> Threshold:
    """First positive-to-negative crossing of the (median L, correlation) curve.

    Accepts a table or a plain sequence of (c, value) pairs.
    """
    if isinstance(table, ConditionalCovTable):
        pts = [(r.median_l, r.corr) for r in table.valid_rows]
    else:
        pts = [(float(c), float(v)) for c, v in table]
    pts.sort()
    for (c0, v0), (c1, v1) in zip(pts, pts[1:]):
        if v0 > 0 and v1 < 0:
            return Threshold(True, c0 + (c1 - c0) * v0 / (v0 - v1), (c0, c1))
        if v0 == 0 and v1 < 0:
            return Threshold(True, c0, (c0, c0))
    return Threshold(False)


@dataclass
class TotalCovReport:
    total_cov: float
    within: float
    between: float
    residual: float
    bootstrap_se: float
    unconditional_cov: float
    flagged_bins: int

    @property
    def within_tolerance(self) -> bool:
        return abs(self.residual) <= 3.0 * self.bootstrap_se


def total_covariance_check(batch: STSampleBatch, bins=None, bootstrap: int = 100,
                           bootstrap_size: Optional[int] = None, seed: int = 0) -> TotalCovReport:
    """Law of total covariance for (a_p, Omega) over the L bins.

    Cov(a, W) = E_bin[Cov(a, W | bin)] + Cov_bin(E[a|bin], E[W|bin]) with
    population (ddof=0) moments, so the residual is exact up to rounding.
    """
    bins = batch.config.bins if bins is None else bins
    a = batch.a_p
    w = batch.omega_proxy
    n = len(a)
    total = float(np.mean((a - a.mean()) * (w - w.mean())))
    within = 0.0
    means = []
    flagged = 0
    for idx in _bin_indices(batch.l_value, bins):
        m = len(idx)
        if m == 0:
            continue
        if m < 2:
            flagged += 1
        ai, wi = a[idx], w[idx]
        within += m / n * float(np.mean((ai - ai.mean()) * (wi - wi.mean())))
        means.append((m / n, float(ai.mean()), float(wi.mean())))
    wts = np.array([t[0] for t in means])
    am = np.array([t[1] for t in means])
    wm = np.array([t[2] for t in means])
    between = float(np.sum(wts * (am - np.sum(wts * am)) * (wm - np.sum(wts * wm))))
    residual = within + between - total

    rng = np.random.default_rng(seed)
    size = min(n, bootstrap_size or n)
    boots = []
    for _ in range(bootstrap):
        idx = rng.integers(0, n, size)
        ab, wb = a[idx], w[idx]
        boots.append(np.mean((ab - ab.mean()) * (wb - wb.mean())))
    se = float(np.std(boots, ddof=1)) * math.sqrt(size / n) if bootstrap > 1 else float("nan")
    return TotalCovReport(total, within, between, residual, se,
                          float(np.cov(batch.cos_theta, w)[0, 1]), flagged)


@dataclass
class ConvergenceReport:
    prime_counts: list[int]
    values: np.ndarray  # (len(prime_counts), bins) within-bin correlations
    medians: np.ndarray
    weighted_means: list[float]
    successive_change: list[float]
    decay_exponent: float


def convergence_in_P(config: STModelConfig, prime_counts: Sequence[int]) -> ConvergenceReport:
    """Decile correlations as more primes enter the model (common random numbers)."""
    counts = sorted(int(k) for k in prime_counts)
    allp = first_primes(max(counts))
    vals, meds, wmeans = [], [], []
    for k in counts:
        ps = allp[:k]
        if config.target_prime not in ps:
            raise ValueError(f"target prime {config.target_prime} not among first {k} primes")
        cfg = STModelConfig(primes=ps, samples=config.samples, target_prime=config.target_prime,
                            bins=config.bins, seed=config.seed, chunk_size=config.chunk_size,
                            workers=config.workers, memory_budget_bytes=config.memory_budget_bytes)
        tab = conditional_cov_table(run_model(cfg))
        vals.append([r.corr for r in tab.rows])
        meds.append([r.median_l for r in tab.rows])
        wmeans.append(tab.weighted_mean())
    vals = np.array(vals)
    change = [float(np.max(np.abs(vals[i + 1] - vals[i]))) for i in range(len(counts) - 1)]
    exponent = float("nan")
    if len(change) >= 2 and all(c > 0 for c in change):
        mids = np.array([0.5 * (counts[i] + counts[i + 1]) for i in range(len(change))])
        slope = np.polyfit(np.log(mids), np.log(change), 1)[0]
        exponent = float(-slope)
    return ConvergenceReport(counts, vals, np.array(meds), wmeans, change, exponent)
