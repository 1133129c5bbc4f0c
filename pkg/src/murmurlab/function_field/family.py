"""The family E_D : y^2 = x^3 + x + D(t) over F_q(t), deg D = 3.

L-polynomials come from fibre traces.  The power sum over places of degree
dividing d is

    S_d = sum_{t in F_{q^d}} a_t,   a_t = -sum_x chi(x^3 + x + D(t)),

which already gives +1 / -1 at split / nonsplit nodes and needs no correction
at infinity (additive, trace 0).  With L(T) = prod (1 - gamma_j T) we have
S_d = -sum gamma_j^d, and the unitarized roots zeta_j = gamma_j / q give
p_d = -S_d / q^d.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, Optional, Union

import numpy as np

from . import fq
from .cyclotomic import CyclotomicError, CyclotomicType, cyclotomic_factor

TABLE_BUDGET = 50_000_000  # elements


class AmbiguousTypeError(RuntimeError):
    """Power sums, palindromy and the cyclotomic menu leave two candidates."""


class ConsistencyError(RuntimeError):
    """An arithmetic invariant failed (non-integral L coefficient or Sha)."""


# ---------------------------------------------------------------------------
# character sums


@lru_cache(maxsize=16)
def _field(q: int, d: int) -> fq.ExtField:
    return fq.ExtField(q, d)


@lru_cache(maxsize=16)
def char_sum_table(q: int, d: int = 1) -> np.ndarray:
    """T[c] = sum_{x in F_{q^d}} chi(x^3 + x + c), indexed like ExtField(q, d)."""
    fq.check_q(q)
    if q**d > TABLE_BUDGET:
        raise MemoryError(f"F_{q}^{d} has {q**d} elements; table budget is {TABLE_BUDGET}, use a smaller q")
    F = _field(q, d)
    chi = F.chi_table().astype(float)
    x = F.coords
    y = F.index(F.cube_coords() + x)
    hist = np.bincount(y, minlength=F.size).astype(float)
    shape = (q,) * d
    # T[c] = sum_y H[y] chi(y + c): correlation over the additive group (Z/q)^d
    spec = np.conj(np.fft.fftn(hist.reshape(shape))) * np.fft.fftn(chi.reshape(shape))
    table = np.rint(np.real(np.fft.ifftn(spec))).astype(np.int64).reshape(-1)
    return table


def fibre_trace(q: int, c: int) -> int:
    """a_c = -sum_x chi(x^3 + x + c) for c in F_q."""
    return -int(char_sum_table(q, 1)[c % q])


# ---------------------------------------------------------------------------
# enumeration and depressed classes


def enumerate_family(q: int, n: int = 3) -> Iterator[fq.Poly]:
    """Monic squarefree D of degree n, coefficients lowest first."""
    fq.check_q(q)
    if q % 12 != 7:
        warnings.warn(f"q = {q} is not 7 mod 12; census tables are only tabulated there", stacklevel=2)
    for tail in itertools.product(range(q), repeat=n):
        D = tuple(tail) + (1,)
        if fq.is_squarefree(D, q):
            yield D


def depress(D: fq.Poly, q: int) -> tuple[int, int, int]:
    """Write D(t) = P(t + s) with P(u) = u^3 + b u + c; return (s, b, c)."""
    a0, a1, a2 = (list(D) + [0, 0, 0])[:3]
    inv3 = pow(3, -1, q)
    s = (a2 * inv3) % q
    b = (a1 - a2 * a2 * inv3) % q
    c = (a0 - a1 * a2 * inv3 + 2 * pow(a2, 3, q) * pow(27, -1, q)) % q
    return s, b, c


def shift(P: fq.Poly, s: int, q: int) -> fq.Poly:
    """P(t + s)."""
    out: fq.Poly = ()
    for coef in reversed(P):
        out = fq.add(fq.mul(out, (s % q, 1), q), (coef,), q)
    return out


def disc_poly(D: fq.Poly, q: int) -> fq.Poly:
    """4 + 27 D^2; the discriminant is -16 times this."""
    return fq.add((4,), fq.scale(fq.mul(D, D, q), 27, q), q)


# ---------------------------------------------------------------------------
# bad fibres


@dataclass
class BadPlace:
    pi: fq.Poly
    m: int
    split: bool
    tamagawa: int

    @property
    def kodaira(self) -> str:
        return f"I{self.m}"

    @property
    def degree(self) -> int:
        return fq.deg(self.pi)


def c_infinity(q: int, n: int = 3) -> int:
    if n != 3:
        raise NotImplementedError("c_infinity is tabulated for deg D = 3 only")
    return 4 if q % 3 == 1 else 2


def tamagawa_multiplicative(m: int, split: bool) -> int:
    if split:
        return m
    return 2 if m % 2 == 0 else 1


def bad_fiber_analysis(D: fq.Poly, q: int) -> tuple[list[tuple[fq.Poly, int]], list[BadPlace], int]:
    """Factor 4 + 27 D^2 and classify each finite bad place.

    At a root of the discriminant the cubic has double root x0 = -3D/2, and the
    node is split iff 3 x0 (equivalently -2D) is a square in the residue field.
    """
    D = fq.norm(D, q)
    if fq.deg(D) != 3 or D[-1] != 1:
        raise ValueError("D must be monic of degree 3")
    if not fq.is_squarefree(D, q):
        raise ValueError("D must be squarefree")
    facs = fq.factor(disc_poly(D, q), q)
    if sum(m * fq.deg(p) for p, m in facs) != 6:
        raise ConsistencyError("discriminant factorization does not have degree 6")
    minus2D = fq.scale(D, q - 2, q)
    places = []
    for pi, m in facs:
        split = fq.quadratic_character(minus2D, pi, q) == 1
        places.append(BadPlace(pi, m, split, tamagawa_multiplicative(m, split)))
    return facs, places, c_infinity(q)


def l_degree(facs) -> int:
    return sum(fq.deg(p) for p, _ in facs) - 2


# ---------------------------------------------------------------------------
# power sums and coefficient recovery


def _poly_values(D: fq.Poly, F: fq.ExtField) -> np.ndarray:
    """Indices of D(t) for every t in F."""
    t = F.coords
    acc = np.zeros_like(t)
    for coef in reversed(D):
        acc = F.mul(acc, t)
        acc[:, 0] += coef
    return F.index(acc)


def power_sum(D: fq.Poly, q: int, d: int) -> int:
    """S_d = sum over t in F_{q^d} of the fibre trace a_t."""
    F = _field(q, d)
    return -int(char_sum_table(q, d)[_poly_values(D, F)].sum())


def _newton(p: list, m: int) -> list:
    """c_0..c_k of prod (1 - zeta U) from power sums p[1..k] (exact rationals)."""
    from fractions import Fraction
    e = [Fraction(1)]
    for k in range(1, len(p)):
        s = sum((-1) ** (i - 1) * e[k - i] * p[i] for i in range(1, k + 1))
        e.append(Fraction(s) / k)
    return [(-1) ** k * e[k] for k in range(len(e))]


def coefficients_from_power_sums(S: dict[int, int], q: int, m: int) -> list[int]:
    """c_0..c_k from S_1..S_k (k = len(S)); raises if not integral."""
    from fractions import Fraction
    k = max(S)
    p = [None] + [Fraction(-S[d], q**d) for d in range(1, k + 1)]
    c = _newton(p, m)
    if any(x.denominator != 1 for x in c):
        raise ConsistencyError(f"non-integral L coefficients {c}")
    return [int(x) for x in c]


def palindromic_candidates(c: list[int], m: int) -> list[tuple[int, list[int]]]:
    """Complete c_0..c_k to degree m under c_{m-i} = eps c_i; keep consistent ones."""
    out = []
    for eps in (1, -1):
        full: list[Optional[int]] = [None] * (m + 1)
        ok = True
        for i, x in enumerate(c[: m + 1]):
            for j, val in ((i, x), (m - i, eps * x)):
                if full[j] is None:
                    full[j] = val
                elif full[j] != val:
                    ok = False
        if ok and all(x is not None for x in full):
            out.append((eps, full))
    return out


@dataclass
class UnitizedLPolynomial:
    coeffs: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def epsilon(self) -> int:
        return self.coeffs[-1]

    def value_at_one(self) -> int:
        return sum(self.coeffs)

    def is_palindromic(self) -> bool:
        c, m, e = self.coeffs, self.degree, self.epsilon
        return all(c[m - i] == e * c[i] for i in range(m + 1))

    def l_coefficients(self, q: int) -> tuple[int, ...]:
        """Coefficients of L(T) = L~(qT)."""
        return tuple(c * q**i for i, c in enumerate(self.coeffs))


def resolve_lpoly(m: int, s_of: Callable[[int], int], q: int) -> tuple[UnitizedLPolynomial, CyclotomicType]:
    """Recover L~ of known degree m from lazily computed power sums S_d."""
    if m == 0:
        return UnitizedLPolynomial((1,)), CyclotomicType(())
    S: dict[int, int] = {}
    need = min(2, m)
    for d in range(1, need + 1):
        S[d] = s_of(d)
    c = coefficients_from_power_sums(S, q, m)
    while True:
        good = []
        for eps, full in palindromic_candidates(c, m):
            try:
                good.append((full, cyclotomic_factor(full)))
            except CyclotomicError:
                pass
        if len(good) == 1:
            full, typ = good[0]
            return UnitizedLPolynomial(tuple(full)), typ
        if not good:
            raise CyclotomicError(f"no palindromic completion of {c} (degree {m}) is cyclotomic")
        if len(S) >= m:
            raise AmbiguousTypeError(f"candidates {[g[0] for g in good]} agree through S_{len(S)}")
        S[len(S) + 1] = s_of(len(S) + 1)
        c = coefficients_from_power_sums(S, q, m)


# ---------------------------------------------------------------------------
# per-curve records


@dataclass
class FFCurveRecord:
    q: int
    D: fq.Poly
    disc_factorization: list[tuple[fq.Poly, int]]
    bad_places: list[BadPlace]
    c_infinity: int
    L_unitized: UnitizedLPolynomial
    type: CyclotomicType
    sha: Union[int, str] = field(default=0)

    @property
    def tamagawa_product(self) -> int:
        return math.prod(p.tamagawa for p in self.bad_places)

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "D": list(self.D),
            "disc_factorization": [[list(p), m] for p, m in self.disc_factorization],
            "bad_places": [
                {"pi": list(b.pi), "kodaira": b.kodaira, "split": b.split, "tamagawa": b.tamagawa}
                for b in self.bad_places
            ],
            "c_infinity": self.c_infinity,
            "L": list(self.L_unitized.coeffs),
            "type": self.type.label,
            "sha": self.sha,
        }


def sha_of_curve(record: FFCurveRecord) -> Union[int, str]:
    """|Sha| = L~(1) / (c_inf * prod c_v), or "rank-positive" when Phi_1 divides L~."""
    if record.type.has_trivial_root:
        return "rank-positive"
    num = record.L_unitized.value_at_one()
    den = record.c_infinity * record.tamagawa_product
    if num <= 0 or num % den:
        raise ConsistencyError(f"Sha = {num}/{den} is not a positive integer for D = {record.D}")
    return num // den


def analyse_curve(D: fq.Poly, q: int) -> FFCurveRecord:
    """Full arithmetic of E_D computed from scratch."""
    D = fq.norm(D, q)
    facs, places, cinf = bad_fiber_analysis(D, q)
    m = l_degree(facs)
    L, typ = resolve_lpoly(m, lambda d: power_sum(D, q, d), q)
    rec = FFCurveRecord(q, D, facs, places, cinf, L, typ)
    rec.sha = sha_of_curve(rec)
    return rec


def l_polynomial(D: fq.Poly, q: int) -> UnitizedLPolynomial:
    return analyse_curve(D, q).L_unitized
