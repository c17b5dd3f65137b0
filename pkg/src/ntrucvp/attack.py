"""Message recovery from an NTRU-HPS ciphertext without using the public-key lattice.

Multiplying the encryption equation by a chosen polynomial a gives

    a * m = b + c  (mod q),   b = a * e mod q (public),   c = -p a * r * h mod q,

so u = (m, b + c) lies in the q-ary lattice spanned by M_a = [I | C(a); 0 | qI],
which depends on a alone.  Given an approximation E of V = (m, c), the target
(0, b) + E sits at distance |V - E| from u, and a CVP solver (Babai's nearest
plane on an LLL-reduced M_a, or exact enumeration for small N) returns u.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import mpmath
import numpy as np

from .lattice import (
    ENUM_RANK_CAP,
    EnumContext,
    GsoData,
    LatticeBasis,
    ReductionParams,
    babai_nearest_plane,
    cvp_exact,
    gram_schmidt,
    lll_reduce,
    prepare_enum,
)
from .ntru import Ciphertext, NtruParams, is_valid_plaintext, recover_nonce, encrypt
from .ring import ConvPoly, NotInvertibleError, centerlift, circulant, reduce_mod, star_multiply


class AStrategy(str, Enum):
    ALGORITHM1 = "algorithm1"  # {0,1}^{N-1} x {floor(N q^(1/y))}
    PM2_SHUFFLED = "pm2_shuffled"  # {-2,2}^{N-1} x {floor(N q^(1/y))}, shuffled
    STRUCTURED = "structured"  # (-k..-1, 1..k, floor(N q^(1/y)) + 1)
    UNIFORM = "uniform"  # uniform over {0..q-1}^N


@dataclass(frozen=True)
class AttackConfig:
    y: float
    R: int
    a_strategy: AStrategy = AStrategy.ALGORITHM1
    rn_guess: ConvPoly | None = None
    max_oracle_calls: int = 100
    mode: str = "auto"  # "auto" | "babai" | "exact"

    def __post_init__(self):
        if self.y < 1:
            raise ValueError(f"y must be >= 1, got {self.y}")
        if self.R < 0:
            raise ValueError(f"R must be >= 0, got {self.R}")
        if self.max_oracle_calls < 1:
            raise ValueError("max_oracle_calls must be positive")
        if self.mode not in ("auto", "babai", "exact"):
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "a_strategy", AStrategy(self.a_strategy))


def floor_n_qy(n: int, q: int, y: float) -> int:
    """floor(N * q^(1/y)), exact when q^(1/y) is an integer or close to one."""
    with mpmath.workprec(200):
        v = n * mpmath.power(q, 1 / mpmath.mpf(y))
        k = mpmath.nint(v)
        # 5 * 32^0.4 is 20 up to rounding; do not let it fall to 19
        if abs(v - k) > mpmath.mpf(2) ** -150:
            k = mpmath.floor(v)
        return int(k)


def choose_a(strategy: AStrategy | str, n: int, q: int, y: float, rng: np.random.Generator | None = None) -> ConvPoly:
    strategy = AStrategy(strategy)
    big = floor_n_qy(n, q, y)
    if strategy is AStrategy.ALGORITHM1:
        head = rng.integers(0, 2, size=n - 1).tolist()
        return ConvPoly(head + [big])
    if strategy is AStrategy.PM2_SHUFFLED:
        head = (2 * (2 * rng.integers(0, 2, size=n - 1) - 1)).tolist()
        v = np.array(head + [big], dtype=object)
        return ConvPoly(v[rng.permutation(n)].tolist())
    if strategy is AStrategy.STRUCTURED:
        if n % 2 == 0:
            raise ValueError("the structured choice of a needs odd N = 2k + 1")
        k = (n - 1) // 2
        return ConvPoly(list(range(-k, 0)) + list(range(1, k + 1)) + [big + 1])
    return ConvPoly(rng.integers(0, q, size=n).tolist())


def build_M_a(a: ConvPoly, q: int) -> LatticeBasis:
    """[I_N | C(a); 0_N | q I_N]."""
    n = a.n
    C = circulant(a)
    rows = [[int(i == j) for j in range(n)] + C[i] for i in range(n)]
    rows += [[0] * n + [q * int(i == j) for j in range(n)] for i in range(n)]
    return LatticeBasis(rows)


def in_qary_lattice(v, a: ConvPoly, q: int) -> bool:
    """(x, z) is in L_a iff x * a = z (mod q)."""
    n = a.n
    x, z = ConvPoly(v[:n]), ConvPoly(v[n:])
    return reduce_mod(star_multiply(x, a) - z, q) == ConvPoly.zero(n)


def compute_b(a: ConvPoly, e: ConvPoly | Ciphertext, q: int) -> ConvPoly:
    if isinstance(e, Ciphertext):
        e = e.e
    return reduce_mod(star_multiply(a, e), q)


def compute_c_ground_truth(a: ConvPoly, r: ConvPoly, h: ConvPoly, p: int, q: int) -> ConvPoly:
    """c = -p a * r * h mod q.  Needs the secret nonce: simulation only."""
    return reduce_mod(star_multiply(star_multiply(a, r), h).scale(-p), q)


@dataclass(frozen=True)
class EVector:
    e_vec: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.e_vec) // 2


def oracle_E(c: ConvPoly, R: int, rn_guess: ConvPoly | None, rng: np.random.Generator) -> EVector:
    """E = (r_N, E') with E'_i uniform on [c_i - R, c_i + R]."""
    n = c.n
    first = [0] * n if rn_guess is None else list(rn_guess.coeffs)
    noise = rng.integers(-R, R + 1, size=n) if R else np.zeros(n, dtype=np.int64)
    return EVector(tuple(first) + tuple(ci + int(d) for ci, d in zip(c.coeffs, noise)))


def assemble_target(b: ConvPoly, E: EVector) -> tuple[int, ...]:
    n = b.n
    if len(E.e_vec) != 2 * n:
        raise ValueError(f"E has length {len(E.e_vec)}, expected {2 * n}")
    return tuple(E.e_vec[:n]) + tuple(bi + ei for bi, ei in zip(b.coeffs, E.e_vec[n:]))


def solution_vector(m: ConvPoly, c: ConvPoly) -> tuple[int, ...]:
    return tuple(m.coeffs) + tuple(c.coeffs)


@dataclass
class ReducedLattice:
    """LLL-reduced L_a together with its Gram-Schmidt data, reusable across ciphertexts."""

    a: ConvPoly
    q: int
    basis: LatticeBasis
    gso: GsoData | None
    cache_hit: bool = False
    lll_seconds: float = 0.0
    enum: EnumContext | None = None  # set for exact-mode use

    def enum_context(self) -> EnumContext:
        if self.enum is None:
            self.enum = prepare_enum(build_M_a(self.a, self.q))
        return self.enum

    @classmethod
    def build(cls, a: ConvPoly, q: int, delta: float = 0.99) -> ReducedLattice:
        import time

        t0 = time.perf_counter()
        red = lll_reduce(build_M_a(a, q), ReductionParams(delta=delta))
        gso = gram_schmidt(red)
        return cls(a=a, q=q, basis=red, gso=gso, lll_seconds=time.perf_counter() - t0)

    @classmethod
    def from_basis(cls, a: ConvPoly, q: int, basis: LatticeBasis) -> ReducedLattice:
        return cls(a=a, q=q, basis=basis, gso=gram_schmidt(basis), cache_hit=True)


def _use_exact(cfg_mode: str, n: int) -> bool:
    if cfg_mode == "exact":
        return True
    if cfg_mode == "babai":
        return False
    return 2 * n <= ENUM_RANK_CAP


def run_attack(ct: Ciphertext, cfg: AttackConfig, a: ConvPoly, E: EVector, q: int,
               reduced: ReducedLattice | None = None) -> ConvPoly:
    """One CVP call on L_a; returns the first N coordinates of the answer.

    Nothing here checks the answer -- see verify_candidate.
    """
    n = a.n
    if ct.n != n or E.n != n:
        raise ValueError("ciphertext, a and E disagree on N")
    b = compute_b(a, ct, q)
    target = assemble_target(b, E)
    if _use_exact(cfg.mode, n):
        w = cvp_exact(reduced.enum_context() if reduced is not None else build_M_a(a, q), target)
    else:
        if reduced is None:
            reduced = ReducedLattice.build(a, q)
        w = babai_nearest_plane(reduced.basis, reduced.gso, target)
    return ConvPoly(w[:n])


class Verdict(str, Enum):
    VALID = "valid"
    INVALID = "invalid"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class Verification:
    verdict: Verdict
    nonce: ConvPoly | None = None

    def __bool__(self) -> bool:
        return self.verdict is Verdict.VALID


def verify_candidate(m_prime: ConvPoly, ct: Ciphertext, h: ConvPoly, params: NtruParams) -> Verification:
    """Check m' by recovering the nonce and re-encrypting.

    When h cannot be inverted (even after the Phi shift used by recover_nonce)
    only the plaintext range can be checked and the verdict is indeterminate.
    """
    if not is_valid_plaintext(m_prime, params):
        return Verification(Verdict.INVALID)
    try:
        r = recover_nonce(ct, m_prime, h, params)
    except NotInvertibleError:
        return Verification(Verdict.INDETERMINATE)
    if not params.lr.contains(r):
        return Verification(Verdict.INVALID)
    if encrypt(h, m_prime, r, params) != ct:
        return Verification(Verdict.INVALID)
    return Verification(Verdict.VALID, nonce=r)


# ------------------------------------------------------------ classic attack

def build_M_h(h: ConvPoly, q: int) -> LatticeBasis:
    return build_M_a(h, q)


def classic_cvp_attack(h: ConvPoly, ct: Ciphertext, E: EVector | None, q: int, mode: str = "auto",
                       reduced: ReducedLattice | None = None) -> tuple[ConvPoly, ConvPoly]:
    """CVP in the public-key lattice L_h with target (0, e) + E.

    (p r, e - m) is in L_h, so the second half of the answer gives m = e - w
    (centerlifted) and the first half gives p r.  Returns (m, p r).
    """
    n = h.n
    E = E or EVector((0,) * (2 * n))
    target = assemble_target(ct.e, E)
    if _use_exact(mode, n):
        w = cvp_exact(reduced.enum_context() if reduced is not None else build_M_h(h, q), target)
    else:
        if reduced is None:
            reduced = ReducedLattice.build(h, q)
        w = babai_nearest_plane(reduced.basis, reduced.gso, target)
    m = centerlift(ct.e - ConvPoly(w[n:]), q)
    return m, ConvPoly(w[:n])


@dataclass
class AttackOutcome:
    message: ConvPoly | None
    oracle_calls: int
    verified_nonce: bool
    candidates: list = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.message is not None


def attack_with_oracle(ct: Ciphertext, h: ConvPoly, params: NtruParams, cfg: AttackConfig, a: ConvPoly,
                       c_true: ConvPoly, rng: np.random.Generator, reduced: ReducedLattice | None = None) -> AttackOutcome:
    """Query the simulated oracle up to max_oracle_calls times, stopping at the first verified candidate."""
    q = params.q
    if reduced is None and _use_exact(cfg.mode, a.n):
        reduced = ReducedLattice(a=a, q=q, basis=build_M_a(a, q), gso=None)
    for call in range(1, cfg.max_oracle_calls + 1):
        E = oracle_E(c_true, cfg.R, cfg.rn_guess, rng)
        m_prime = run_attack(ct, cfg, a, E, q, reduced)
        v = verify_candidate(m_prime, ct, h, params)
        if v.verdict is Verdict.VALID:
            return AttackOutcome(m_prime, call, verified_nonce=True)
    return AttackOutcome(None, cfg.max_oracle_calls, verified_nonce=False)
