"""Arithmetic in the convolution rings Z[x]/(x^N - 1) and Z_q[x]/(x^N - 1).

Polynomials are stored as tuples of Python ints (coefficient of x^j at index j),
so products never overflow.  Reduction mod q is always explicit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class RingError(ValueError):
    pass


class DegreeMismatchError(RingError):
    pass


class NotInvertibleError(RingError):
    pass


@dataclass(frozen=True)
class ConvPoly:
    """Element of Z[x]/(x^N - 1)."""

    coeffs: tuple[int, ...]

    def __init__(self, coeffs: Iterable[int]):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in coeffs))
        if not self.coeffs:
            raise RingError("a convolution polynomial needs N >= 1 coefficients")

    @property
    def n(self) -> int:
        return len(self.coeffs)

    @classmethod
    def zero(cls, n: int) -> ConvPoly:
        return cls([0] * n)

    @classmethod
    def one(cls, n: int) -> ConvPoly:
        return cls([1] + [0] * (n - 1))

    @classmethod
    def monomial(cls, n: int, k: int, c: int = 1) -> ConvPoly:
        v = [0] * n
        v[k % n] = c
        return cls(v)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    def _check(self, other: ConvPoly) -> None:
        if self.n != other.n:
            raise DegreeMismatchError(f"degree mismatch: {self.n} != {other.n}")

    def __add__(self, other: ConvPoly) -> ConvPoly:
        self._check(other)
        return ConvPoly(a + b for a, b in zip(self.coeffs, other.coeffs))

    def __sub__(self, other: ConvPoly) -> ConvPoly:
        self._check(other)
        return ConvPoly(a - b for a, b in zip(self.coeffs, other.coeffs))

    def __neg__(self) -> ConvPoly:
        return ConvPoly(-a for a in self.coeffs)

    def scale(self, k: int) -> ConvPoly:
        return ConvPoly(k * a for a in self.coeffs)

    def __mul__(self, other: ConvPoly) -> ConvPoly:
        return star_multiply(self, other)

    def norm2(self) -> int:
        return sum(a * a for a in self.coeffs)

    def evaluate_at_one(self) -> int:
        return sum(self.coeffs)

    def to_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=object)

    def __repr__(self) -> str:
        return f"ConvPoly({list(self.coeffs)})"


@dataclass(frozen=True)
class TernarySpace:
    """T(d1, d2): exactly d1 entries +1, d2 entries -1, the rest 0."""

    d1: int
    d2: int
    n: int

    def __post_init__(self):
        if self.d1 < 0 or self.d2 < 0 or self.d1 + self.d2 > self.n:
            raise RingError(f"invalid ternary space T({self.d1},{self.d2}) for N={self.n}")

    def contains(self, a: ConvPoly) -> bool:
        if a.n != self.n or any(c not in (-1, 0, 1) for c in a):
            return False
        return a.coeffs.count(1) == self.d1 and a.coeffs.count(-1) == self.d2


_INT64_SAFE = 1 << 62


def star_multiply(a: ConvPoly, b: ConvPoly) -> ConvPoly:
    """Cyclic convolution c_k = sum_{i+j = k mod N} a_i b_j, over Z."""
    a._check(b)
    n = a.n
    amax = max(abs(c) for c in a.coeffs)
    bmax = max(abs(c) for c in b.coeffs)
    if amax * bmax * n < _INT64_SAFE:
        full = np.convolve(np.array(a.coeffs, dtype=np.int64), np.array(b.coeffs, dtype=np.int64))
        folded = full[:n].copy()
        folded[: n - 1] += full[n:]
        return ConvPoly(folded.tolist())
    out = [0] * n
    for i, ai in enumerate(a.coeffs):
        if ai:
            for j, bj in enumerate(b.coeffs):
                out[(i + j) % n] += ai * bj
    return ConvPoly(out)


def reduce_mod(a: ConvPoly, q: int) -> ConvPoly:
    if q < 2:
        raise RingError(f"modulus must be >= 2, got {q}")
    return ConvPoly(c % q for c in a.coeffs)


def centerlift(a: ConvPoly, q: int) -> ConvPoly:
    """Representatives in (-q/2, q/2]; q/2 itself stays positive."""
    if q < 2:
        raise RingError(f"modulus must be >= 2, got {q}")
    half = q // 2
    out = []
    for c in a.coeffs:
        r = c % q
        # for odd q the interval is [-(q-1)/2, (q-1)/2]
        if r > half:
            r -= q
        out.append(r)
    return ConvPoly(out)


# --- polynomial helpers over F_p (lists, low degree first) ---

def _trim(u: list[int]) -> list[int]:
    while u and u[-1] == 0:
        u.pop()
    return u


def _pdivmod(u: list[int], v: list[int], p: int) -> tuple[list[int], list[int]]:
    u = list(u)
    inv_lead = pow(v[-1], -1, p)
    dv = len(v) - 1
    quot = [0] * max(len(u) - dv, 1)
    for k in range(len(u) - 1 - dv, -1, -1):
        coef = u[k + dv] * inv_lead % p
        quot[k] = coef
        if coef:
            for j, vj in enumerate(v):
                u[k + j] = (u[k + j] - coef * vj) % p
    return _trim(quot), _trim(u[:dv] if dv else [])


def _psub_mul(a: list[int], q: list[int], b: list[int], p: int) -> list[int]:
    """a - q*b over F_p."""
    out = list(a) + [0] * max(0, len(q) + len(b) - 1 - len(a))
    for i, qi in enumerate(q):
        if qi:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] - qi * bj) % p
    return _trim([c % p for c in out])


def invert_mod_prime(f: ConvPoly, p: int) -> ConvPoly:
    """Inverse of f in F_p[x]/(x^N - 1) by the extended Euclidean algorithm."""
    n = f.n
    modulus = [p - 1] + [0] * (n - 1) + [1]  # x^N - 1
    r0, r1 = modulus, _trim([c % p for c in f.coeffs])
    s0, s1 = [], [1]  # Bezout coefficients of f
    if not r1:
        raise NotInvertibleError("zero polynomial is not invertible")
    while len(r1) > 1:
        quot, rem = _pdivmod(r0, r1, p)
        r0, r1 = r1, rem
        s0, s1 = s1, _psub_mul(s0, quot, s1, p)
        if not r1:
            raise NotInvertibleError(f"gcd(f, x^N - 1) mod {p} is not constant")
    inv_c = pow(r1[0], -1, p)
    out = [0] * n
    for k, c in enumerate(s1):
        out[k % n] = (out[k % n] + c * inv_c) % p
    return ConvPoly(out)


def invert_mod_prime_power(f: ConvPoly, q: int) -> ConvPoly:
    """Inverse of f in Z_q[x]/(x^N - 1) for q = 2^e, by Newton/Hensel lifting."""
    if q < 2 or q & (q - 1):
        raise RingError(f"q must be a power of 2, got {q}")
    F = invert_mod_prime(f, 2)
    two = ConvPoly.monomial(f.n, 0, 2)
    mod = 2
    while mod < q:
        mod = min(mod * mod, q * q)
        F = reduce_mod(star_multiply(F, two - star_multiply(f, F)), mod)
    return reduce_mod(F, q)


def sample_ternary(space: TernarySpace, rng: np.random.Generator) -> ConvPoly:
    """Uniform element of T(d1, d2); support chosen by a Fisher-Yates shuffle."""
    perm = rng.permutation(space.n)
    out = [0] * space.n
    for k in perm[: space.d1]:
        out[int(k)] = 1
    for k in perm[space.d1 : space.d1 + space.d2]:
        out[int(k)] = -1
    return ConvPoly(out)


def sample_uniform(n: int, low: int, high: int, rng: np.random.Generator) -> ConvPoly:
    """Coefficients uniform in the closed range [low, high]."""
    return ConvPoly(int(x) for x in rng.integers(low, high + 1, size=n))


def circulant(a: ConvPoly | Sequence[int]) -> list[list[int]]:
    """Row i is a rotated right by i places, so that [u] C(a) == u * a."""
    coeffs = list(a.coeffs if isinstance(a, ConvPoly) else a)
    n = len(coeffs)
    return [[coeffs[(j - i) % n] for j in range(n)] for i in range(n)]
