"""Cyclotomic factorization of unitarized L-polynomials."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

# every n with phi(n) <= 4
MENU = (1, 2, 3, 4, 5, 6, 8, 10, 12)


class CyclotomicError(ValueError):
    """Polynomial is not a product of cyclotomic polynomials from the menu."""


def _int_divmod(a: list[int], b: list[int]) -> tuple[list[int], list[int]]:
    # a, b lowest degree first, b monic
    r = list(a)
    quo = [0] * max(len(a) - len(b) + 1, 0)
    for k in range(len(a) - len(b), -1, -1):
        c = r[k + len(b) - 1]
        quo[k] = c
        if c:
            for j, y in enumerate(b):
                r[k + j] -= c * y
    rem = r[: len(b) - 1]
    while rem and rem[-1] == 0:
        rem.pop()
    return quo, rem


def _int_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, lowest degree first."""
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num, rem = _int_divmod(num, list(cyclotomic_poly(d)))
            assert not rem
    return tuple(num)


def euler_phi(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def mobius(n: int) -> int:
    out, k = 1, 2
    while k * k <= n:
        if n % k == 0:
            n //= k
            if n % k == 0:
                return 0
            out = -out
        k += 1
    return -out if n > 1 else out


def ramanujan_sum(n: int, d: int) -> int:
    """Sum of d-th powers of the primitive n-th roots of unity."""
    m = n // math.gcd(n, d)
    return mobius(m) * euler_phi(n) // euler_phi(m)


@dataclass(frozen=True)
class CyclotomicType:
    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(sorted(self.indices)))

    @property
    def degree(self) -> int:
        return sum(euler_phi(n) for n in self.indices)

    @property
    def label(self) -> str:
        if not self.indices:
            return "1"
        parts = []
        for n, k in sorted(Counter(self.indices).items()):
            parts.append(f"Phi{n}" + (f"^{k}" if k > 1 else ""))
        return "*".join(parts)

    def __str__(self):
        return self.label

    def polynomial(self) -> tuple[int, ...]:
        out = [1]
        for n in self.indices:
            out = _int_mul(out, list(cyclotomic_poly(n)))
        return tuple(out)

    def value_at_one(self) -> int:
        """prod_j Phi_{n_j}(1)."""
        return math.prod(sum(cyclotomic_poly(n)) for n in self.indices)

    def power_sum(self, d: int) -> int:
        """p_d = sum of d-th powers of all roots."""
        return sum(ramanujan_sum(n, d) for n in self.indices)

    @property
    def has_trivial_root(self) -> bool:
        return 1 in self.indices

    @classmethod
    def parse(cls, label: str) -> "CyclotomicType":
        if label == "1":
            return cls(())
        idx = []
        for part in label.split("*"):
            body, _, k = part.partition("^")
            idx += [int(body.removeprefix("Phi"))] * int(k or 1)
        return cls(tuple(idx))


def cyclotomic_factor(coeffs) -> CyclotomicType:
    """Factor a monic integer polynomial (lowest degree first) over the menu.

    Accepts the unitarized L-polynomial directly: its leading coefficient is the
    sign epsilon, so the polynomial is first multiplied by that sign.
    """
    c = [int(x) for x in coeffs]
    while c and c[-1] == 0:
        c.pop()
    if not c or abs(c[-1]) != 1:
        raise CyclotomicError(f"leading coefficient must be +-1: {coeffs}")
    if len(c) - 1 > 4:
        raise CyclotomicError("degree above 4 is outside the menu")
    if c[-1] == -1:
        c = [-x for x in c]
    found = []
    for n in MENU:
        phi = list(cyclotomic_poly(n))
        while len(c) >= len(phi):
            quo, rem = _int_divmod(c, phi)
            if rem:
                break
            found.append(n)
            c = quo
    if c != [1]:
        raise CyclotomicError(f"not a product of cyclotomics: {list(coeffs)}")
    return CyclotomicType(tuple(found))
