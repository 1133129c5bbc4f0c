"""Arithmetic of rational elliptic curves from a-invariants and stored a_p."""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from ..bessel_barrier import is_prime, primes_upto

AP_PRIMES = primes_upto(3571)  # the 500 primes carried by every record
assert len(AP_PRIMES) == 500


class BadReductionError(ValueError):
    """p divides the discriminant of the given model."""


def b_invariants(a1, a2, a3, a4, a6):
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def discriminant(ainvs: Sequence[int]) -> int:
    b2, b4, b6, b8 = b_invariants(*ainvs)
    return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


@lru_cache(maxsize=2048)
def _chi(p: int) -> np.ndarray:
    chi = -np.ones(p, dtype=np.int64)
    chi[(np.arange(p, dtype=np.int64) ** 2) % p] = 1
    chi[0] = 0
    return chi


def ap_count(ainvs: Sequence[int], p: int, allow_bad: bool = False) -> int:
    """a_p = p + 1 - #E(F_p) by direct count over x.

    With allow_bad, primes dividing the discriminant are counted too (singular
    point included), which on a minimal model gives the bad-prime a_p.
    """
    if not is_prime(p) or p > 10_000:
        raise ValueError(f"p must be a prime <= 10^4, got {p}")
    a1, a2, a3, a4, a6 = (int(a) for a in ainvs)
    if not allow_bad and discriminant(ainvs) % p == 0:
        raise BadReductionError(f"p = {p} divides the discriminant")
    if p == 2:
        n = 1
        for x in range(2):
            for y in range(2):
                n += (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % 2 == 0
        return p + 1 - n
    x = np.arange(p, dtype=np.int64)
    # (2y + a1 x + a3)^2 = (a1 x + a3)^2 + 4(x^3 + a2 x^2 + a4 x + a6)
    h = (a1 * x + a3) % p
    f = (((x * x) % p * x) % p + a2 * x * x % p + a4 * x + a6) % p
    g = (h * h + 4 * f) % p
    return -int(_chi(p)[g].sum())


def hecke_coefficients(ap: Mapping[int, int], conductor: int, M: int) -> np.ndarray:
    """a_1..a_M (index 0 unused) from prime traces in integer normalization."""
    missing = [p for p in primes_upto(M) if p not in ap]
    if missing:
        raise ValueError(f"a_p needed for all primes <= {M}; first missing p = {missing[0]}")
    a = np.zeros(M + 1, dtype=np.float64)
    a[1] = 1.0
    spf = np.zeros(M + 1, dtype=np.int64)
    for p in primes_upto(M):
        spf[p::p][spf[p::p] == 0] = p
    for n in range(2, M + 1):
        p = int(spf[n])
        m, k = n, 0
        while m % p == 0:
            m //= p
            k += 1
        if m > 1:
            a[n] = a[n // m] * a[m]
            continue
        # prime power p^k
        if conductor % p == 0:
            a[n] = float(ap[p]) ** k
        elif k == 1:
            a[n] = ap[p]
        else:
            a[n] = ap[p] * a[n // p] - p * a[n // (p * p)]
    return a


def truncation_point(conductor: int, precision: float) -> int:
    """Smallest M with 4 e^{-2 pi (M+1)/sqrt N} / (1 - e^{-2 pi/sqrt N}) < precision.

    Uses |a_m| <= tau(m) sqrt(m) <= 2m, so each tail term is at most 4 e^{-2 pi m/sqrt N}.
    """
    s = math.sqrt(conductor)
    r = 2 * math.pi / s
    M = math.ceil((math.log(4 / (precision * (1 - math.exp(-r))))) / r)
    return max(M, math.ceil(6 * s))


def l_value(ap: Mapping[int, int], conductor: int, precision: float = 1e-12) -> float:
    """L(E,1) = 2 sum_m (a_m/m) exp(-2 pi m / sqrt N), valid for weight-2 newforms."""
    M = truncation_point(conductor, precision)
    a = hecke_coefficients(ap, conductor, M)
    m = np.arange(1, M + 1)
    terms = a[1:] / m * np.exp(-2 * np.pi * m / math.sqrt(conductor))
    return float(2.0 * math.fsum(terms))


def adjoint_feature(p: int, a_p) -> np.ndarray:
    """R_2(p) = -2p[(p+1)^2 + a^2] / ((p+1)^2 - a^2)^2."""
    a = np.asarray(a_p, dtype=float)
    den = (p + 1) ** 2 - a * a
    if np.any(den == 0):
        raise ZeroDivisionError("|a_p| = p + 1")
    out = -2.0 * p * ((p + 1) ** 2 + a * a) / den**2
    return out if out.ndim else float(out)
