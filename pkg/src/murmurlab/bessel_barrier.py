"""Tilted semicircle numerics: modified Bessel functions, moments, barrier function.

The linear tilt is d mu(x) ∝ sqrt(1 - x^2) exp(lam * x) dx on [-1, 1], whose
normaliser is pi * I_1(lam) / lam.  The Euler tilt replaces exp(lam * x) by
(1 - 2x/sqrt(p) + 1/p)^(-lam).

All quadrature runs in the angle variable x = cos(theta), where the density
becomes sin(theta)^2 * weight(cos theta) on [0, pi] and is smooth, so
Gauss-Legendre converges spectrally instead of fighting the square-root
endpoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, NamedTuple, Union

import numpy as np

__all__ = [
    "DomainError",
    "BesselEval",
    "LinearTilt",
    "EulerTilt",
    "TiltedMeasure",
    "bessel_i",
    "bessel_ie",
    "bessel_eval",
    "mean_x2",
    "mean_x",
    "cov_x_x2",
    "cov_x_x2_quadrature",
    "phi",
    "perfect_square_residual",
    "euler_tilt_cov",
    "euler_tilt_cov_t",
    "euler_barrier",
    "is_prime",
    "primes_upto",
]

SERIES_LIMIT = 30.0
DEFAULT_NODES = 2048
_PHI_SERIES_LIMIT = 2.0


class DomainError(ValueError):
    """Argument outside the supported domain of a special function."""


class BesselEval(NamedTuple):
    order: int
    argument: float
    value: float


def _check(order: int, z: float) -> None:
    if order not in (0, 1, 2):
        raise DomainError(f"unsupported Bessel order {order!r}; only 0, 1, 2")
    if not (z > 0.0) or not math.isfinite(z):
        raise DomainError(f"Bessel argument must be positive and finite, got {z!r}")
    if z >= 1e6:
        raise DomainError(f"Bessel argument {z!r} beyond supported range (< 1e6)")


def _series(order: int, z: float) -> float:
    # sum_k (z/2)^(2k+nu) / (k! (k+nu)!)
    h = 0.5 * z
    term = h**order / math.factorial(order)
    total = term
    q = h * h
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + order))
        total += term
        if term < 1e-17 * total:
            return total


def _asymptotic_scaled(order: int, z: float) -> float:
    # e^-z I_nu(z) ~ (2 pi z)^(-1/2) sum_k (-1)^k a_k(nu) / z^k
    mu = 4.0 * order * order
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        nxt = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        if abs(nxt) >= abs(term):  # series is asymptotic: stop at the smallest term
            break
        term = nxt
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return total / math.sqrt(2.0 * math.pi * z)


def bessel_ie(order: int, z: float) -> float:
    """Exponentially scaled modified Bessel function exp(-z) * I_order(z)."""
    _check(order, z)
    if z <= SERIES_LIMIT:
        return _series(order, z) * math.exp(-z)
    return _asymptotic_scaled(order, z)


def bessel_i(order: int, z: float) -> float:
    """Modified Bessel function of the first kind I_order(z), order in {0, 1, 2}.

    Power series for z <= 30, asymptotic expansion beyond.  Overflows (raises
    OverflowError) past z ~ 713; use :func:`bessel_ie` there.
    """
    _check(order, z)
    if z <= SERIES_LIMIT:
        return _series(order, z)
    return _asymptotic_scaled(order, z) * math.exp(z)


def bessel_eval(order: int, z: float) -> BesselEval:
    return BesselEval(order, float(z), bessel_i(order, z))


def _ratio_21(z: float) -> float:
    """I_2(z) / I_1(z) for z > 0."""
    return bessel_ie(2, z) / bessel_ie(1, z)


# ---------------------------------------------------------------------------
# closed forms


def mean_x(lam: float) -> float:
    """E[x] under the linear tilt, I_2(lam) / I_1(lam)."""
    if lam == 0.0:
        return 0.0
    a = abs(lam)
    # d/dlam log Z with Z = pi I_1(lam) / lam gives I_0/I_1 - 2/lam = I_2/I_1
    return math.copysign(_ratio_21(a), lam)


def mean_x2(lam: float) -> float:
    """E[x^2] under the linear tilt, 1 - 3 I_2(lam) / (lam I_1(lam))."""
    if not math.isfinite(lam):
        raise DomainError(f"tilt must be finite, got {lam!r}")
    if lam == 0.0:
        return 0.25
    a = abs(lam)
    return 1.0 - 3.0 * _ratio_21(a) / a


@lru_cache(maxsize=None)
def _phi_series_coefficients(terms: int = 24) -> tuple[float, ...]:
    """Coefficients of S(z) = 4 I1 I2 + z I2^2 - z I1^2 in powers of z.

    phi(z) = z S(z) / I1(z)^2; computing S exactly avoids the cancellation of
    the leading terms (phi ~ z^4/48 near 0).
    """
    size = 2 * terms + 4
    i1 = [Fraction(0)] * size
    i2 = [Fraction(0)] * size
    for k in range(terms):
        if 2 * k + 1 < size:
            i1[2 * k + 1] = Fraction(1, 2 ** (2 * k + 1) * math.factorial(k) * math.factorial(k + 1))
        if 2 * k + 2 < size:
            i2[2 * k + 2] = Fraction(1, 2 ** (2 * k + 2) * math.factorial(k) * math.factorial(k + 2))

    def mul(a, b):
        out = [Fraction(0)] * size
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b[: size - i]):
                    if bj:
                        out[i + j] += ai * bj
        return out

    p12 = mul(i1, i2)
    p22 = mul(i2, i2)
    p11 = mul(i1, i1)
    s = [4 * p12[n] + (p22[n - 1] - p11[n - 1] if n else 0) for n in range(size)]
    return tuple(float(c) for c in s)


def phi(z: float) -> float:
    """Barrier function z^2 [(I_0/I_1)^2 - 1] - 4; positive for every z > 0."""
    if not (z > 0.0) or not math.isfinite(z):
        raise DomainError(f"phi needs z > 0, got {z!r}")
    if z <= _PHI_SERIES_LIMIT:
        coeffs = _phi_series_coefficients()
        s = 0.0
        for c in reversed(coeffs):
            s = s * z + c
        i1 = _series(1, z)
        return z * s / (i1 * i1)
    r = bessel_ie(0, z) / bessel_ie(1, z)
    return z * z * (r * r - 1.0) - 4.0


def cov_x_x2(lam: float) -> float:
    """Cov(x, x^2) under the linear tilt, via the Bessel closed form.

    d/dlam E[x^2] simplifies to 3 phi(lam) / lam^3, odd in lam.
    """
    if not math.isfinite(lam):
        raise DomainError(f"tilt must be finite, got {lam!r}")
    if lam == 0.0:
        return 0.0
    a = abs(lam)
    return math.copysign(3.0 * phi(a) / a**3, lam)


def perfect_square_residual(t: float) -> float:
    """1 + 2t^2 - 2t sqrt(1+t^2) - (sqrt(1+t^2) - t)^2, zero for all t."""
    s = math.sqrt(1.0 + t * t)
    return 1.0 + 2.0 * t * t - 2.0 * t * s - (s - t) ** 2


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class LinearTilt:
    lam: float


@dataclass(frozen=True)
class EulerTilt:
    """Tilt (1 - 2 t x + t^2)^(-lam) with t = 1/sqrt(p).

    ``p`` may be any real > 1 for asymptotic studies; prime checks live in
    :func:`euler_tilt_cov`.
    """

    p: float
    lam: float

    @property
    def t(self) -> float:
        return 1.0 / math.sqrt(self.p)


Tilt = Union[LinearTilt, EulerTilt]


@lru_cache(maxsize=8)
def _angle_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    theta = 0.5 * np.pi * (x + 1.0)
    return np.cos(theta), 0.5 * np.pi * w * np.sin(theta) ** 2


@dataclass(frozen=True)
class TiltedMeasure:
    kind: Tilt
    quadrature_points: int = DEFAULT_NODES

    def __post_init__(self):
        if self.quadrature_points < 2:
            raise DomainError("need at least two quadrature nodes")
        lam = self.kind.lam
        if not math.isfinite(lam):
            raise DomainError(f"tilt must be finite, got {lam!r}")
        if isinstance(self.kind, EulerTilt) and not self.kind.p > 1.0:
            raise DomainError(f"Euler tilt needs p > 1, got {self.kind.p!r}")

    def log_weight(self, x: np.ndarray) -> np.ndarray:
        k = self.kind
        if isinstance(k, LinearTilt):
            return k.lam * x
        t = k.t
        return -k.lam * np.log1p(-2.0 * t * x + t * t)

    @property
    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes x_i and normalised weights w_i (summing to one)."""
        x, w = _angle_rule(self.quadrature_points)
        lw = self.log_weight(x)
        w = w * np.exp(lw - lw.max())
        return x, w / w.sum()

    def raw_mass(self) -> float:
        """Integral of sqrt(1-x^2) * tilt over [-1, 1] (unnormalised)."""
        x, w = _angle_rule(self.quadrature_points)
        return float(np.sum(w * np.exp(self.log_weight(x))))

    def expect(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        x, w = self.nodes
        return float(np.sum(w * f(x)))

    def cov(self, f, g) -> float:
        x, w = self.nodes
        fx, gx = f(x), g(x)
        fm = np.sum(w * fx)
        gm = np.sum(w * gx)
        return float(np.sum(w * (fx - fm) * (gx - gm)))


def cov_x_x2_quadrature(lam: float, nodes: int = DEFAULT_NODES) -> float:
    """E[x^3] - E[x] E[x^2] by direct quadrature (independent of the Bessel route)."""
    x, w = TiltedMeasure(LinearTilt(lam), nodes).nodes
    m1 = np.sum(w * x)
    m2 = np.sum(w * x * x)
    m3 = np.sum(w * x**3)
    return float(m3 - m1 * m2)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, int(n**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return [int(v) for v in np.nonzero(sieve)[0]]


def euler_tilt_cov_t(t: float, lam: float, nodes: int = DEFAULT_NODES) -> float:
    """Cov(g, x^2) with g = -log(1 - 2tx + t^2) under the Euler tilt, for 0 < t < 1."""
    if not 0.0 < t < 1.0:
        raise DomainError(f"t must lie in (0, 1), got {t!r}")
    m = TiltedMeasure(EulerTilt(1.0 / (t * t), lam), nodes)
    return m.cov(lambda x: -np.log1p(-2.0 * t * x + t * t), lambda x: x * x)


def euler_tilt_cov(p: int, lam: float, nodes: int = DEFAULT_NODES) -> float:
    """alpha_p(lam): Cov(g_p(x), x^2) under the Euler-factor tilted semicircle."""
    if not is_prime(int(p)) or int(p) != p:
        raise DomainError(f"p must be prime, got {p!r}")
    return euler_tilt_cov_t(1.0 / math.sqrt(p), lam, nodes)


def euler_barrier(p: int, lam: float, nodes: int = DEFAULT_NODES) -> float:
    """Cov(log h, x^2) = -alpha_p(lam); negative at lam = 0 by symmetry."""
    return -euler_tilt_cov(p, lam, nodes)
