"""Prime-field polynomials and small extension fields F_{q^d}.

Polynomials are tuples of ints mod q, lowest degree first, with no trailing
zeros (the zero polynomial is the empty tuple).
"""
from __future__ import annotations

import random
from functools import lru_cache

import numpy as np

Poly = tuple


def check_q(q: int) -> None:
    if q < 5 or any(q % k == 0 for k in range(2, int(q**0.5) + 1)):
        raise ValueError(f"q must be a prime >= 5, got {q}")


def trim(a) -> Poly:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return tuple(a)


def norm(a, q: int) -> Poly:
    return trim(x % q for x in a)


def deg(a: Poly) -> int:
    return len(a) - 1


def add(a: Poly, b: Poly, q: int) -> Poly:
    n = max(len(a), len(b))
    return trim(((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % q for i in range(n))


def sub(a: Poly, b: Poly, q: int) -> Poly:
    return add(a, scale(b, q - 1, q), q)


def scale(a: Poly, c: int, q: int) -> Poly:
    return trim((x * c) % q for x in a)


def mul(a: Poly, b: Poly, q: int) -> Poly:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return norm(out, q)


def divmod_poly(a: Poly, b: Poly, q: int) -> tuple[Poly, Poly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(a)
    inv = pow(b[-1], -1, q)
    quo = [0] * max(len(a) - len(b) + 1, 0)
    for k in range(len(a) - len(b), -1, -1):
        c = (r[k + len(b) - 1] * inv) % q
        quo[k] = c
        if c:
            for j, y in enumerate(b):
                r[k + j] = (r[k + j] - c * y) % q
    return trim(quo), norm(r[: len(b) - 1], q)


def mod(a: Poly, b: Poly, q: int) -> Poly:
    return divmod_poly(a, b, q)[1]


def monic(a: Poly, q: int) -> Poly:
    return scale(a, pow(a[-1], -1, q), q) if a else a


def gcd(a: Poly, b: Poly, q: int) -> Poly:
    while b:
        a, b = b, mod(a, b, q)
    return monic(a, q)


def derivative(a: Poly, q: int) -> Poly:
    return norm((i * a[i] for i in range(1, len(a))), q)


def powmod(a: Poly, e: int, m: Poly, q: int) -> Poly:
    result: Poly = (1,)
    base = mod(a, m, q)
    while e:
        if e & 1:
            result = mod(mul(result, base, q), m, q)
        base = mod(mul(base, base, q), m, q)
        e >>= 1
    return result


def evaluate(a: Poly, x: int, q: int) -> int:
    acc = 0
    for c in reversed(a):
        acc = (acc * x + c) % q
    return acc


def is_squarefree(a: Poly, q: int) -> bool:
    return deg(gcd(a, derivative(a, q), q)) == 0


def _squarefree_parts(f: Poly, q: int) -> list[tuple[Poly, int]]:
    # q is larger than any degree we meet, so f' != 0 for nonconstant f
    out = []
    i = 1
    g = gcd(f, derivative(f, q), q)
    w = divmod_poly(f, g, q)[0]
    while deg(w) > 0:
        y = gcd(w, g, q)
        z = divmod_poly(w, y, q)[0]
        if deg(z) > 0:
            out.append((monic(z, q), i))
        i += 1
        w = y
        g = divmod_poly(g, y, q)[0]
    if deg(g) > 0:
        raise ValueError("characteristic smaller than degree is not supported")
    return out


def _distinct_degree(f: Poly, q: int) -> list[tuple[Poly, int]]:
    out = []
    h: Poly = (0, 1)
    x: Poly = (0, 1)
    k = 0
    while deg(f) >= 2 * (k + 1):
        k += 1
        h = powmod(h, q, f, q)
        g = gcd(f, sub(h, x, q), q)
        if deg(g) > 0:
            out.append((g, k))
            f = divmod_poly(f, g, q)[0]
            h = mod(h, f, q)
    if deg(f) > 0:
        out.append((monic(f, q), deg(f)))
    return out


def _equal_degree(f: Poly, k: int, q: int, rng: random.Random) -> list[Poly]:
    if deg(f) == k:
        return [f]
    e = (q**k - 1) // 2
    while True:
        a = trim(rng.randrange(q) for _ in range(deg(f)))
        if deg(a) < 1:
            continue
        g = gcd(sub(powmod(a, e, f, q), (1,), q), f, q)
        if 0 < deg(g) < deg(f):
            return (_equal_degree(g, k, q, rng)
                    + _equal_degree(divmod_poly(f, g, q)[0], k, q, rng))


def factor(f: Poly, q: int, seed: int = 0) -> list[tuple[Poly, int]]:
    """Monic irreducible factors with multiplicity, sorted by (degree, coefficients)."""
    f = norm(f, q)
    if deg(f) < 1:
        return []
    rng = random.Random(seed)
    out = []
    for part, mult in _squarefree_parts(monic(f, q), q):
        for g, k in _distinct_degree(part, q):
            for h in _equal_degree(g, k, q, rng):
                out.append((h, mult))
    out.sort(key=lambda t: (len(t[0]), t[0][::-1]))
    return out


def is_irreducible(f: Poly, q: int) -> bool:
    fs = factor(f, q)
    return len(fs) == 1 and fs[0][1] == 1


def monic_irreducibles(q: int, k: int):
    """All monic irreducible polynomials of degree k over F_q."""
    import itertools
    for tail in itertools.product(range(q), repeat=k):
        f = tuple(tail) + (1,)
        if k == 1 or (f[0] != 0 and is_irreducible(f, q)):
            yield f


def quadratic_character(a: Poly, m: Poly, q: int) -> int:
    """Legendre symbol of a in F_q[t]/(m) for irreducible m."""
    a = mod(a, m, q)
    if not a:
        return 0
    r = powmod(a, (q ** deg(m) - 1) // 2, m, q)
    return 1 if r == (1,) else -1


# ---------------------------------------------------------------------------
# extension fields


@lru_cache(maxsize=None)
def default_modulus(q: int, d: int) -> Poly:
    if d == 1:
        return (0, 1)
    for f in monic_irreducibles(q, d):
        return f
    raise RuntimeError("no irreducible polynomial found")


class ExtField:
    """F_{q^d} = F_q[s]/(m(s)) with elements indexed by base-q digits.

    Element index sum_i a_i q^i corresponds to sum_i a_i s^i, so addition is
    digit-wise and the base field sits at indices 0..q-1.
    """

    def __init__(self, q: int, d: int, modulus: Poly | None = None):
        check_q(q)
        self.q, self.d = q, d
        self.modulus = modulus or default_modulus(q, d)
        self.size = q**d
        self.powers = q ** np.arange(d, dtype=np.int64)
        idx = np.arange(self.size, dtype=np.int64)
        self.coords = (idx[:, None] // self.powers[None, :]) % q  # (N, d)

    def index(self, coords: np.ndarray) -> np.ndarray:
        return (np.asarray(coords) % self.q) @ self.powers

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Product of coefficient arrays of shape (..., d)."""
        q, d = self.q, self.d
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        prod = np.zeros(np.broadcast_shapes(a.shape, b.shape)[:-1] + (2 * d - 1,), dtype=np.int64)
        for i in range(d):
            for j in range(d):
                prod[..., i + j] += a[..., i] * b[..., j]
        prod %= q
        m = self.modulus
        for k in range(2 * d - 2, d - 1, -1):
            c = prod[..., k].copy()
            for j in range(d):
                prod[..., k - d + j] -= c * m[j]
            prod[..., k] = 0
        return prod[..., :d] % q

    def chi_table(self) -> np.ndarray:
        """Quadratic character on all elements, as int8 indexed like the field."""
        sq = self.index(self.mul(self.coords, self.coords))
        chi = -np.ones(self.size, dtype=np.int8)
        chi[sq] = 1
        chi[0] = 0
        return chi

    def cube_plus_linear(self, b: int) -> np.ndarray:
        """Indices of t^3 + b t for every t."""
        t = self.coords
        t3 = self.mul(self.mul(t, t), t)
        return self.index(t3 + b * t)

    def cube_coords(self) -> np.ndarray:
        t = self.coords
        return self.mul(self.mul(t, t), t)
