"""Kloosterman sums, the Weil bound, a Petersson off-diagonal demo and the mollifier constant."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .bessel_barrier import primes_upto


class WeilViolation(AssertionError):
    pass


def divisor_count(n: int) -> int:
    count, k = 0, 1
    while k * k <= n:
        if n % k == 0:
            count += 1 if k * k == n else 2
        k += 1
    return count


def mobius_sieve(D: int) -> np.ndarray:
    mu = np.ones(D + 1, dtype=np.int8)
    mu[0] = 0
    for p in primes_upto(D):
        mu[p::p] *= -1
        mu[p * p::p * p] = 0
    return mu


def modinv_array(x: np.ndarray, c: int) -> np.ndarray:
    """Inverses mod c of units x by a vectorized extended Euclid."""
    r0 = np.full_like(x, c)
    r1 = x % c
    t0 = np.zeros_like(x)
    t1 = np.ones_like(x)
    while np.any(r1 != 0):
        live = r1 != 0
        q = np.where(live, r0 // np.where(live, r1, 1), 0)
        r0, r1 = np.where(live, r1, r0), np.where(live, r0 - q * r1, r1)
        t0, t1 = np.where(live, t1, t0), np.where(live, t0 - q * t1, t1)
    return t0 % c


@lru_cache(maxsize=512)
def _units(c: int) -> tuple[np.ndarray, np.ndarray]:
    if c == 1:
        return np.zeros(1, np.int64), np.zeros(1, np.int64)
    k = np.arange(1, c, dtype=np.int64)
    x = k[np.gcd(k, c) == 1]
    return x, modinv_array(x, c)


def kloosterman_complex(m: int, n: int, c: int) -> complex:
    if c < 1:
        raise ValueError("modulus must be positive")
    x, inv = _units(c)
    phase = ((m * x + n * inv) % c) / c
    return complex(np.exp(2j * np.pi * phase).sum())


def _prime_powers(c: int) -> list[int]:
    out, d = [], 2
    while d * d <= c:
        if c % d == 0:
            q = 1
            while c % d == 0:
                c //= d
                q *= d
            out.append(q)
        d += 1
    if c > 1:
        out.append(c)
    return out


def kloosterman_direct(m: int, n: int, c: int) -> float:
    x, inv = _units(c)
    return float(np.cos(2 * np.pi * (((m * x + n * inv) % c) / c)).sum())


def kloosterman(m: int, n: int, c: int) -> float:
    """S(m, n; c) = sum over units x mod c of e((m x + n x^-1)/c); real.

    Split over prime powers with S(m,n;c1 c2) = S(m c2^-2, n; c1) S(m c1^-2, n; c2).
    """
    if c < 1:
        raise ValueError("modulus must be positive")
    out = 1.0
    for q in _prime_powers(c):
        r = c // q
        out *= kloosterman_direct(m * pow(r * r, -1, q) if q > 1 else m, n, q)
    return out


def weil_bound(m: int, n: int, c: int) -> float:
    return divisor_count(c) * math.sqrt(c * math.gcd(math.gcd(m, n), c))


def kloosterman_table(m_max: int, n_max: int, c: int) -> np.ndarray:
    """S(m, n; c) for 1 <= m <= m_max, 1 <= n <= n_max as one matrix product."""
    x, inv = _units(c)
    m = np.arange(1, m_max + 1)
    n = np.arange(1, n_max + 1)
    A = np.exp(2j * np.pi * ((np.outer(m, x)) % c) / c)
    B = np.exp(2j * np.pi * ((np.outer(n, inv)) % c) / c)
    return (A @ B.T).real


@dataclass
class WeilReport:
    checked: int
    violations: list = field(default_factory=list)
    max_ratio: float = 0.0
    argmax: tuple = ()
    max_imag: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations


def weil_scan(m_max: int = 20, n_max: int = 20, c_max: int = 1000, strict: bool = True) -> WeilReport:
    if c_max > 10_000:
        raise ValueError("c_max above 10^4 is outside the desk-scale budget")
    rep = WeilReport(0)
    g = np.gcd.outer(np.arange(1, m_max + 1), np.arange(1, n_max + 1))
    for c in range(1, c_max + 1):
        S = kloosterman_table(m_max, n_max, c)
        bound = divisor_count(c) * np.sqrt(c * np.gcd(g, c))
        ratio = np.abs(S) / bound
        k = np.unravel_index(np.argmax(ratio), ratio.shape)
        if ratio[k] > rep.max_ratio:
            rep.max_ratio = float(ratio[k])
            rep.argmax = (int(k[0]) + 1, int(k[1]) + 1, c)
        bad = np.argwhere(ratio > 1 + 1e-9)
        rep.violations += [(int(i) + 1, int(j) + 1, c) for i, j in bad]
        rep.checked += S.size
    if strict and rep.violations:
        raise WeilViolation(f"{len(rep.violations)} Weil-bound violations, first {rep.violations[0]}")
    return rep


# ---------------------------------------------------------------------------
# J_1 and the Petersson off-diagonal


def j1(x):
    """Bessel J_1: power series below 15, Hankel asymptotic above."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 15
    xs = x[small]
    term = xs / 2
    acc = term.copy()
    for k in range(1, 60):
        term = term * (-(xs * xs) / 4) / (k * (k + 1))
        acc = acc + term
    out[small] = acc
    xl = x[~small]
    if xl.size:
        mu = 4.0
        P = np.ones_like(xl)
        Q = np.zeros_like(xl)
        # Hankel expansion with terms through order 8 in 1/x
        tP = np.ones_like(xl)
        tQ = (mu - 1) / (8 * xl)
        Q = tQ.copy()
        for k in range(1, 8):
            tP = -tP * (mu - (4 * k - 3) ** 2) * (mu - (4 * k - 1) ** 2) / ((2 * k - 1) * (2 * k) * (8 * xl) ** 2)
            P = P + tP
            tQ = -tQ * (mu - (4 * k - 1) ** 2) * (mu - (4 * k + 1) ** 2) / ((2 * k) * (2 * k + 1) * (8 * xl) ** 2)
            Q = Q + tQ
        w = xl - 0.75 * np.pi
        out[~small] = np.sqrt(2 / (np.pi * xl)) * (P * np.cos(w) - Q * np.sin(w))
    return out if out.ndim else float(out)


@dataclass
class PeterssonResult:
    value: float
    error_bound: float
    terms: int
    c_max: int


def petersson_tail_bound(m: int, n: int, N: int, K: int) -> float:
    """Certified bound on the terms c = kN with k > K.

    Each term is at most tau(c) sqrt(c g)/c * z/(2c) by Weil and |J_1(x)| <= x/2,
    with tau(kN) <= tau(k) tau(N); partial summation against
    sum_{k <= x} tau(k) <= x (log x + 1) gives sum_{k > K} tau(k) k^{-3/2}
    <= 3 K^{-1/2} (log K + 3).
    """
    z = 4 * math.pi * math.sqrt(m * n)
    g = math.gcd(m, n)
    pref = 2 * math.pi * divisor_count(N) * math.sqrt(g) * z / (2 * N**1.5)
    return pref * 3 * K**-0.5 * (math.log(K) + 3)


def petersson_offdiagonal(m: int, n: int, N: int, tol: float | None = None,
                          K: int = 1024, k_cap: int = 1 << 20) -> PeterssonResult:
    """Delta(m,n;N) = 2 pi sum_{c = 0 mod N} S(m,n;c)/c J_1(4 pi sqrt(mn)/c).

    Sums c = N, 2N, ..., KN and reports a certified bound on the rest.  With
    tol, K is doubled until the bound meets it, up to k_cap.
    """
    if tol is not None:
        while petersson_tail_bound(m, n, N, K) > tol:
            K *= 2
            if K > k_cap:
                raise RuntimeError(f"tail bound {tol} needs more than {k_cap} moduli; raise k_cap")
    z = 4 * math.pi * math.sqrt(m * n)
    cs = np.arange(N, K * N + 1, N)
    terms = np.array([kloosterman(m, n, int(c)) for c in cs]) / cs * j1(z / cs)
    return PeterssonResult(float(2 * math.pi * math.fsum(terms)),
                           petersson_tail_bound(m, n, N, K), len(cs), int(cs[-1]))


def mollifier_diagonal(D: int) -> float:
    """sum_{d <= D} mu(d)^2 / d^2; tends to 15/pi^2."""
    if D < 1:
        raise ValueError("D must be >= 1")
    mu = mobius_sieve(D).astype(np.int64)
    d = np.arange(1, D + 1, dtype=float)
    return float(math.fsum((mu[1:] ** 2) / (d * d)))
