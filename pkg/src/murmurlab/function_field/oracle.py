"""Euler-product cross-check for L-polynomials.

Independent of the power-sum route: every place v of degree k <= K gets its
own residue field F_q[t]/(pi_v), the fibre is counted directly there, and the
local factors are multiplied as power series in T truncated at T^K.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import fq
from .family import disc_poly


@lru_cache(maxsize=8)
def _places(q: int, K: int):
    """(pi, residue field, chi table, coords of x^3 + x) for every place of degree <= K."""
    out = []
    for k in range(1, K + 1):
        for pi in fq.monic_irreducibles(q, k):
            F = fq.ExtField(q, k, modulus=pi)
            x = F.coords
            out.append((pi, F, F.chi_table(), F.cube_coords() + x))
    return out


def _series_inverse(f: np.ndarray, K: int) -> np.ndarray:
    g = np.zeros(K + 1, dtype=object)
    g[0] = 1
    for n in range(1, K + 1):
        g[n] = -sum(f[i] * g[n - i] for i in range(1, min(n, len(f) - 1) + 1))
    return g


def local_trace(D: fq.Poly, place) -> int:
    pi, F, chi, cubic = place
    d = list(fq.mod(D, pi, F.q)) + [0] * F.d
    vals = F.index(cubic + np.array(d[: F.d], dtype=np.int64))
    return -int(chi[vals].astype(np.int64).sum())


def euler_product_oracle(D: fq.Poly, q: int, K: int) -> list[int]:
    """Coefficients T^0..T^K of prod_{deg v <= K} (local factor)^(-1)."""
    D = fq.norm(D, q)
    disc = disc_poly(D, q)
    acc = np.zeros(K + 1, dtype=object)
    acc[0] = 1
    for place in _places(q, K):
        pi = place[0]
        k = fq.deg(pi)
        a = local_trace(D, place)
        f = np.zeros(K + 1, dtype=object)
        f[0] = 1
        f[k] = -a
        if fq.mod(disc, pi, q):  # good place
            if 2 * k <= K:
                f[2 * k] = q**k
        elif abs(a) != 1:
            raise AssertionError(f"multiplicative place {pi} has trace {a}")
        inv = _series_inverse(f, K)
        acc = np.convolve(acc, inv)[: K + 1]
    return [int(x) for x in acc]
