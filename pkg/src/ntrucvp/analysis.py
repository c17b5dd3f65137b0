"""The inequalities behind the L_a attack, evaluated numerically.

* the assumption lambda_1(L_a) > q^(1/y), checked by exact SVP for small N;
* its Gaussian-heuristic surrogate 0.35 sqrt(q) > q^(1/y);
* the sufficient condition on a structured a that rules out short vectors
  outside the sublattice spanned by [I | C(a)];
* the bound y < 2 log2 q / (2 + log2(N (1 + R^2))) under which a CVP oracle
  is guaranteed to return the solution vector.

Real comparisons run at 200 bits with mpmath so that cases sitting on the
boundary (q^(1/y) an integer, say) are not misclassified by float rounding.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import mpmath
import numpy as np

from .attack import build_M_a, choose_a, floor_n_qy
from .lattice import ENUM_RANK_CAP, RankTooLargeError, ReductionParams, enumerate_ball, lll_reduce, svp_exact
from .ring import ConvPoly, star_multiply

PREC_BITS = 200
HEURISTIC_CONSTANT = "0.35"  # rounded 1/sqrt(pi e) = 0.3423...

# reference (N, q, y) tuples, claimed to satisfy both the assumption and its heuristic form
REFERENCE_TUPLES = ((21, 2**5, 1.5), (23, 2**5, 2.0), (25, 2**9, 2.0), (27, 2**9, 2.0))


def _qy(q, y):
    return mpmath.power(mpmath.mpf(q), 1 / mpmath.mpf(y))


def gaussian_heuristic_estimate(n: int, q: int) -> tuple[float, float]:
    """(gh, gh / sqrt(N)) for L_a: sqrt(q N / (pi e)) and sqrt(q / (pi e))."""
    if n < 1 or q < 1:
        raise ValueError("n and q must be positive")
    with mpmath.workprec(PREC_BITS):
        adjusted = mpmath.sqrt(mpmath.mpf(q) / (mpmath.pi * mpmath.e))
        gh = adjusted * mpmath.sqrt(n)
        return float(gh), float(adjusted)


def check_heuristic_inequality(q: int, y: float) -> bool:
    """0.35 sqrt(q) > q^(1/y), with the rounded constant."""
    with mpmath.workprec(PREC_BITS):
        return bool(mpmath.mpf(HEURISTIC_CONSTANT) * mpmath.sqrt(q) > _qy(q, y))


def check_heuristic_exact_constant(q: int, y: float) -> bool:
    """Same comparison with the unrounded 1/sqrt(pi e)."""
    with mpmath.workprec(PREC_BITS):
        return bool(mpmath.sqrt(mpmath.mpf(q) / (mpmath.pi * mpmath.e)) > _qy(q, y))


def check_assumption_exact(a: ConvPoly, q: int, y: float) -> tuple[bool | None, float | None]:
    """(lambda_1(L_a) > q^(1/y), lambda_1); (None, None) when 2N is above the enumeration cap."""
    if 2 * a.n > ENUM_RANK_CAP:
        return None, None
    try:
        v, lam = svp_exact(build_M_a(a, q))
    except RankTooLargeError:
        return None, None
    with mpmath.workprec(PREC_BITS):
        ok = mpmath.sqrt(sum(x * x for x in v)) > _qy(q, y)
    return bool(ok), lam


def structured_a_rhs(n: int, q: int, y: float):
    """(1/N) (q - q^(1/y))^2 / q^(2/y), as an mpf."""
    t = _qy(q, y)
    return (mpmath.mpf(q) - t) ** 2 / (n * t * t)


def check_structured_a_inequality(n: int, q: int, y: float) -> bool:
    """(N^2 - 1) N / 12 + a_{N-1}^2 < (1/N) (q - q^(1/y))^2 / q^(2/y) for the structured a.

    The left side is sum a_j^2 for a = (-k..-1, 1..k, floor(N q^(1/y)) + 1).
    """
    if n % 2 == 0:
        raise ValueError("the structured a needs odd N")
    top = floor_n_qy(n, q, y) + 1
    lhs = (n * n - 1) * n // 12 + top * top
    with mpmath.workprec(PREC_BITS):
        return bool(lhs < structured_a_rhs(n, q, y))


def short_vector_precondition(a: ConvPoly, q: int, y: float) -> bool:
    """sum a_j^2 < (1/N) (q - q^(1/y))^2 / q^(2/y): what the short-vector argument actually uses."""
    with mpmath.workprec(PREC_BITS):
        return bool(a.norm2() < structured_a_rhs(a.n, q, y))


def y_upper_bound(n: int, R: int, q: int) -> float:
    """2 log2 q / (2 + log2(N (1 + R^2)))."""
    with mpmath.workprec(PREC_BITS):
        return float(2 * mpmath.log(q, 2) / (2 + mpmath.log(n * (1 + R * R), 2)))


def check_y_bound(n: int, R: int, q: int, y: float) -> bool:
    """y < 2 log2 q / (2 + log2(N (1 + R^2))).

    Equivalent to N (1 + R^2) < q^(2/y) / 4; both forms are evaluated and must agree.
    """
    if min(n, q, y) <= 0 or R < 0:
        raise ValueError("parameters must be positive")
    with mpmath.workprec(PREC_BITS):
        log_form = mpmath.mpf(y) < 2 * mpmath.log(q, 2) / (2 + mpmath.log(n * (1 + R * R), 2))
        power_form = n * (1 + R * R) < _qy(q, y) ** 2 / 4
    if bool(log_form) != bool(power_form):
        raise ArithmeticError(f"the two forms of the y bound disagree at N={n}, R={R}, q={q}, y={y}")
    return bool(log_form)


# ---------------------------------------------------------- short-vector check

def in_top_sublattice(v, a: ConvPoly) -> bool:
    """(x, z) lies in the span of [I | C(a)] iff z == x * a over Z."""
    n = a.n
    return list(star_multiply(ConvPoly(v[:n]), a).coeffs) == list(v[n:])


@dataclass
class ShortVectorCheck:
    holds: bool | None  # None: precondition failed and the check was skipped
    mode: str  # "exact" | "sampled" | "skipped"
    checked: int = 0
    counterexample: list | None = None


def short_vector_check(a: ConvPoly, q: int, y: float, trials: int = 10_000,
                       rng: np.random.Generator | None = None, require_precondition: bool = True) -> ShortVectorCheck:
    """Every nonzero v in L_a with |v| <= q^(1/y) lies in the span of [I | C(a)].

    Exact when 2N fits the enumeration cap: all such v are enumerated.
    Otherwise `trials` random small combinations of an LLL-reduced basis are tested.
    """
    if require_precondition and not short_vector_precondition(a, q, y):
        return ShortVectorCheck(holds=None, mode="skipped")
    radius = float(_qy(q, y))
    basis = build_M_a(a, q)
    if 2 * a.n <= ENUM_RANK_CAP:
        res = enumerate_ball(basis, radius)
        for v in res.vectors:
            if not in_top_sublattice(v, a):
                return ShortVectorCheck(False, "exact", len(res.vectors), v)
        return ShortVectorCheck(True, "exact", len(res.vectors))
    rng = rng or np.random.default_rng(0)
    precision = "exact" if basis.max_abs() >= 1 << 26 else "float"
    red = np.array(lll_reduce(basis, ReductionParams(precision=precision)).rows, dtype=object)
    r2 = radius * radius
    checked = 0
    for _ in range(trials):
        x = rng.integers(-1, 2, size=red.shape[0])
        if not x.any():
            continue
        v = (x.astype(object) @ red).tolist()
        if sum(t * t for t in v) <= r2:
            checked += 1
            if not in_top_sublattice(v, a):
                return ShortVectorCheck(False, "sampled", checked, v)
    return ShortVectorCheck(True, "sampled", checked)


# ---------------------------------------------------------------- full report

@dataclass
class ParamCheckReport:
    n: int
    q: int
    y: float
    R: int
    gh_estimate: float
    gh_adjusted: float
    q_root: float
    lambda1: float | None = None
    heuristic_ok: bool | None = None
    heuristic_exact_constant_ok: bool | None = None
    assumption_ok: bool | None = None
    structured_ok: bool | None = None
    y_bound_ok: bool | None = None
    y_bound: float | None = None
    a: list | None = None
    a_seed: int | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def check_params(n: int, q: int, y: float, R: int = 0, exact: bool = True, a: ConvPoly | None = None,
                 a_seed: int = 0) -> ParamCheckReport:
    """Evaluate every inequality for (N, q, y, R).

    With exact=True and 2N within the enumeration cap, lambda_1 is computed for
    a (by default uniform over {0..q-1}^N drawn from a_seed).
    """
    gh, adj = gaussian_heuristic_estimate(n, q)
    with mpmath.workprec(PREC_BITS):
        qroot = float(_qy(q, y))
    rep = ParamCheckReport(
        n=n, q=q, y=y, R=R, gh_estimate=gh, gh_adjusted=adj, q_root=qroot,
        heuristic_ok=check_heuristic_inequality(q, y),
        heuristic_exact_constant_ok=check_heuristic_exact_constant(q, y),
        y_bound_ok=check_y_bound(n, R, q, y),
        y_bound=y_upper_bound(n, R, q),
    )
    if n % 2 == 1:
        rep.structured_ok = check_structured_a_inequality(n, q, y)
    if exact and 2 * n <= ENUM_RANK_CAP:
        if a is None:
            a = choose_a("uniform", n, q, y, np.random.default_rng(a_seed))
            rep.a_seed = a_seed
        rep.a = list(a.coeffs)
        rep.assumption_ok, rep.lambda1 = check_assumption_exact(a, q, y)
    if (n, q, float(y)) in REFERENCE_TUPLES and rep.heuristic_ok is False:
        rep.notes.append(
            "listed as satisfying both inequalities, but 0.35*sqrt(q) > q^(1/y) evaluates false "
            f"({0.35 * math.sqrt(q):.4f} <= {qroot:.4f})"
        )
    return rep
