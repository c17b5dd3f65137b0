"""NTRU-HPS key generation, encryption and decryption over Z[x]/(x^N - 1)."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ring import (
    ConvPoly,
    NotInvertibleError,
    TernarySpace,
    centerlift,
    invert_mod_prime,
    invert_mod_prime_power,
    reduce_mod,
    sample_ternary,
    star_multiply,
)


class ParameterError(ValueError):
    pass


class KeyGenerationError(RuntimeError):
    pass


class PlaintextError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % k for k in range(3, math.isqrt(n) + 1, 2))


@dataclass(frozen=True)
class NtruParams:
    n: int
    q: int
    d: int
    p: int = 3
    lf: TernarySpace | None = None
    lg: TernarySpace | None = None
    lr: TernarySpace | None = None
    # f = 1 + p*G with G in T(d, d) instead of f in T(d+1, d)
    f_one_plus_pg: bool = False
    keygen_retries: int = 100

    def __post_init__(self):
        n, p, q, d = self.n, self.p, self.q, self.d
        if not is_prime(n):
            raise ParameterError(f"N must be prime, got {n}")
        if not is_prime(p):
            raise ParameterError(f"p must be prime, got {p}")
        if q < 2 or q & (q - 1):
            raise ParameterError(f"q must be a power of 2, got {q}")
        if math.gcd(n, q) != 1 or math.gcd(p, q) != 1:
            raise ParameterError("need gcd(N, q) = gcd(p, q) = 1")
        if d < 1 or 2 * d + 1 > n:
            raise ParameterError(f"need d >= 1 and 2d + 1 <= N, got d={d}, N={n}")
        if self.lf is None:
            object.__setattr__(self, "lf", TernarySpace(d + 1, d, n))
        if self.lg is None:
            object.__setattr__(self, "lg", TernarySpace(d, d, n))
        if self.lr is None:
            object.__setattr__(self, "lr", TernarySpace(d, d, n))

    @property
    def nonce_sum(self) -> int:
        """r(1) for every nonce in L_r."""
        return self.lr.d1 - self.lr.d2


@dataclass(frozen=True)
class KeyPair:
    f: ConvPoly
    g: ConvPoly
    fp: ConvPoly
    fq: ConvPoly
    h: ConvPoly


@dataclass(frozen=True)
class Ciphertext:
    e: ConvPoly

    @property
    def n(self) -> int:
        return self.e.n


def _sample_f(params: NtruParams, rng: np.random.Generator) -> ConvPoly:
    if params.f_one_plus_pg:
        G = sample_ternary(TernarySpace(params.d, params.d, params.n), rng)
        return ConvPoly.one(params.n) + G.scale(params.p)
    return sample_ternary(params.lf, rng)


def keygen(params: NtruParams, rng: np.random.Generator) -> KeyPair:
    for _ in range(params.keygen_retries):
        f = _sample_f(params, rng)
        try:
            fp = invert_mod_prime(f, params.p)
            fq = invert_mod_prime_power(f, params.q)
        except NotInvertibleError:
            continue
        g = sample_ternary(params.lg, rng)
        h = reduce_mod(star_multiply(fq, g), params.q)
        return KeyPair(f=f, g=g, fp=fp, fq=fq, h=h)
    raise KeyGenerationError(
        f"no invertible f found in {params.keygen_retries} attempts; check the parameters"
    )


def sample_message(params: NtruParams, rng: np.random.Generator) -> ConvPoly:
    """Centerlift of a uniform element of R_p."""
    half = (params.p - 1) // 2
    return ConvPoly(int(x) for x in rng.integers(-half, half + 1, size=params.n))


def sample_nonce(params: NtruParams, rng: np.random.Generator) -> ConvPoly:
    return sample_ternary(params.lr, rng)


def is_valid_plaintext(m: ConvPoly, params: NtruParams) -> bool:
    half = (params.p - 1) // 2
    return m.n == params.n and all(-half <= c <= half for c in m)


def encrypt(h: ConvPoly, m: ConvPoly, r: ConvPoly, params: NtruParams) -> Ciphertext:
    if not is_valid_plaintext(m, params):
        raise PlaintextError("message coefficients must lie in [-(p-1)/2, (p-1)/2]")
    e = star_multiply(r, h).scale(params.p) + m
    return Ciphertext(reduce_mod(e, params.q))


def decrypt(ct: Ciphertext, kp: KeyPair, params: NtruParams) -> ConvPoly:
    a = centerlift(star_multiply(kp.f, ct.e), params.q)
    b = reduce_mod(star_multiply(kp.fp, a), params.p)
    return centerlift(b, params.p)


def decryption_margin(kp: KeyPair, m: ConvPoly, r: ConvPoly, params: NtruParams) -> int:
    """max |p r*g + f*m|; decryption is guaranteed when this is < q/2."""
    v = star_multiply(r, kp.g).scale(params.p) + star_multiply(kp.f, m)
    return max(abs(c) for c in v)


def _all_ones(n: int) -> ConvPoly:
    return ConvPoly([1] * n)


@functools.lru_cache(maxsize=256)
def _shifted_inverse(h: ConvPoly, q: int) -> tuple[int, ConvPoly]:
    """Find t and the inverse of h + t*(1 + x + ... + x^{N-1}) mod q.

    In R every r satisfies r * Phi = r(1) * Phi, so (h + t Phi) * r = h * r + t r(1) Phi.
    The shift makes h invertible when only its value at 1 is the obstruction
    (always the case for h = F_q * g with g(1) = 0).
    """
    phi = _all_ones(h.n)
    for t in (0, 1):
        try:
            return t, invert_mod_prime_power(h + phi.scale(t), q)
        except NotInvertibleError:
            continue
    raise NotInvertibleError("h is not invertible mod q, even after shifting by multiples of Phi")


def recover_nonce(ct: Ciphertext, m: ConvPoly, h: ConvPoly, params: NtruParams) -> ConvPoly:
    """Solve p r * h + m = e (mod q) for r, centerlifted.

    The nonce sum r(1) is taken from params.lr; it only matters when h itself
    is not invertible and a shifted inverse is used.
    """
    q = params.q
    t, h_inv = _shifted_inverse(h, q)
    rhs = (ct.e - m).scale(pow(params.p, -1, q))
    if t:
        rhs = rhs + _all_ones(h.n).scale(t * params.nonce_sum)
    return centerlift(star_multiply(rhs, h_inv), q)


# --- text serialization: one polynomial per line, "N modulus c_0 ... c_{N-1}" ---

def format_poly(a: ConvPoly, modulus: int) -> str:
    return " ".join(str(x) for x in (a.n, modulus, *a.coeffs))


def parse_poly(line: str) -> tuple[ConvPoly, int]:
    fields = line.split()
    if len(fields) < 3:
        raise ValueError(f"malformed polynomial line: {line!r}")
    n, modulus, *coeffs = (int(x) for x in fields)
    if len(coeffs) != n:
        raise ValueError(f"expected {n} coefficients, found {len(coeffs)}")
    return ConvPoly(coeffs), modulus


def _read_lines(path: Path) -> list[str]:
    return [ln for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]


def save_public_key(path: Path, h: ConvPoly, params: NtruParams) -> None:
    Path(path).write_text(f"# ntru public key p={params.p} d={params.d}\n{format_poly(h, params.q)}\n")


def load_public_key(path: Path) -> tuple[ConvPoly, int]:
    return parse_poly(_read_lines(path)[0])


def save_keypair(path: Path, kp: KeyPair, params: NtruParams) -> None:
    q, p = params.q, params.p
    lines = [
        f"# ntru private key p={p} d={params.d}; lines: f g fp fq h",
        format_poly(kp.f, q),
        format_poly(kp.g, q),
        format_poly(kp.fp, p),
        format_poly(kp.fq, q),
        format_poly(kp.h, q),
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_keypair(path: Path) -> tuple[KeyPair, int, int]:
    """Returns (keypair, p, q)."""
    lines = _read_lines(path)
    if len(lines) != 5:
        raise ValueError(f"expected 5 polynomial lines in {path}, found {len(lines)}")
    (f, q), (g, _), (fp, p), (fq, _), (h, _) = (parse_poly(ln) for ln in lines)
    return KeyPair(f=f, g=g, fp=fp, fq=fq, h=h), p, q


def save_ciphertext(path: Path, ct: Ciphertext, q: int) -> None:
    Path(path).write_text(format_poly(ct.e, q) + "\n")


def load_ciphertext(path: Path) -> tuple[Ciphertext, int]:
    e, q = parse_poly(_read_lines(path)[0])
    return Ciphertext(e), q
