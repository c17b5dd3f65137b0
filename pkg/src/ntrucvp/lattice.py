"""Integer lattices: Gram-Schmidt, LLL, Babai's nearest plane, exact SVP/CVP.

Two precision modes are supported throughout:

* ``"exact"`` -- integral (fraction-free) Gram-Schmidt and LLL on Python ints.
  Slow, but every quantity is exact; practical up to rank ~40.
* ``"float"`` -- float64 Gram-Schmidt with int64 bases, compiled with numba.
  Results are size-reduced/LLL-reduced up to rounding; callers that need a
  certificate re-check with the exact routines.

Exact SVP/CVP enumerates over an LLL-reduced basis.  Above rank 30 a few
tours of block reduction (block size 20) run first, which shrinks the
enumeration tree by orders of magnitude; the unimodular transform is kept
and checked so results are still expressed in the input basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels

ENUM_RANK_CAP = 60
# |entries| above this may overflow int64 dot products in the float kernels
_FLOAT_ENTRY_LIMIT = 1 << 26


class LatticeError(ValueError):
    pass


class DependentRowsError(LatticeError):
    pass


class PrecisionError(LatticeError):
    pass


class RankTooLargeError(LatticeError):
    pass


class DimensionMismatchError(LatticeError):
    pass


@dataclass(frozen=True)
class ReductionParams:
    delta: float = 0.99
    precision: str = "float"  # "float" | "exact"

    def __post_init__(self):
        if not 0.25 < self.delta < 1:
            raise ValueError(f"delta must lie in (1/4, 1), got {self.delta}")
        if self.precision not in ("float", "exact"):
            raise ValueError(f"unknown precision mode {self.precision!r}")

    @property
    def delta_fraction(self) -> Fraction:
        return Fraction(str(self.delta))


class LatticeBasis:
    """Row basis of an integer lattice, stored with arbitrary-precision ints."""

    def __init__(self, rows: Sequence[Sequence[int]] | np.ndarray):
        rows = [[int(v) for v in row] for row in rows]
        if not rows or not rows[0]:
            raise LatticeError("empty basis")
        m = len(rows[0])
        if any(len(r) != m for r in rows):
            raise DimensionMismatchError("ragged basis rows")
        self._rows = tuple(tuple(r) for r in rows)

    @property
    def rows(self) -> list[list[int]]:
        return [list(r) for r in self._rows]

    @property
    def nrows(self) -> int:
        return len(self._rows)

    @property
    def ncols(self) -> int:
        return len(self._rows[0])

    def __eq__(self, other):
        return isinstance(other, LatticeBasis) and self._rows == other._rows

    def __hash__(self):
        return hash(self._rows)

    def __repr__(self):
        return f"LatticeBasis({self.nrows}x{self.ncols})"

    def max_abs(self) -> int:
        return max(abs(v) for r in self._rows for v in r)

    def as_int64(self) -> np.ndarray:
        if self.max_abs() >= _FLOAT_ENTRY_LIMIT:
            raise PrecisionError("basis entries too large for the float kernels")
        return np.array(self._rows, dtype=np.int64)

    def gram(self) -> list[list[int]]:
        R = self._rows
        return [[_idot(R[i], R[j]) for j in range(self.nrows)] for i in range(self.nrows)]

    def det(self) -> int:
        """Determinant of a square basis (exact, Bareiss)."""
        if self.nrows != self.ncols:
            raise DimensionMismatchError("determinant needs a square basis")
        return bareiss_det(self.rows)

    def volume2(self) -> int:
        """Squared volume: det of the Gram matrix."""
        return bareiss_det(self.gram())

    def combine(self, coeffs: Sequence[int]) -> list[int]:
        if len(coeffs) != self.nrows:
            raise DimensionMismatchError("coefficient vector has wrong length")
        out = [0] * self.ncols
        for c, row in zip(coeffs, self._rows):
            c = int(c)
            if c:
                for j, v in enumerate(row):
                    out[j] += c * v
        return out

    def coefficients(self, v: Sequence[int]) -> list[Fraction]:
        """Rational x with x * B = v (square full-rank bases only)."""
        return solve_rows(self.rows, [list(v)])[0]

    def contains(self, v: Sequence[int]) -> bool:
        return all(x.denominator == 1 for x in self.coefficients(v))


def _idot(u, v) -> int:
    return sum(a * b for a, b in zip(u, v))


def bareiss_det(M: list[list[int]]) -> int:
    A = [list(r) for r in M]
    n = len(A)
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def solve_rows(B: list[list[int]], V: list[list[int]]) -> list[list[Fraction]]:
    """Solve X B = V exactly for a square nonsingular B (Gauss-Jordan on B^T)."""
    n = len(B)
    if any(len(r) != n for r in B):
        raise DimensionMismatchError("solve_rows needs a square basis")
    k = len(V)
    # columns of the augmented system: B^T x = v^T for every v
    A = [[Fraction(B[j][i]) for j in range(n)] + [Fraction(V[t][i]) for t in range(k)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise DependentRowsError("basis is singular")
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [a * inv for a in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [[A[i][n + t] for i in range(n)] for t in range(k)]


def same_lattice(B1: LatticeBasis, B2: LatticeBasis) -> bool:
    """Each basis expresses the other with integer coefficients."""
    if B1.nrows != B2.nrows or B1.ncols != B2.ncols:
        return False
    for X in (solve_rows(B1.rows, B2.rows), solve_rows(B2.rows, B1.rows)):
        if any(x.denominator != 1 for row in X for x in row):
            return False
    return True


# ---------------------------------------------------------------- Gram-Schmidt

@dataclass(frozen=True)
class GsoData:
    bstar: np.ndarray  # n x m, Fraction objects (exact) or float64
    mu: np.ndarray  # n x n lower triangular, unit diagonal
    norms: np.ndarray  # |b*_i|^2
    exact: bool

    @property
    def rank(self) -> int:
        return self.mu.shape[0]


def _integral_gso(rows: list[list[int]]) -> tuple[list[int], list[list[int]]]:
    """Fraction-free GSO: D[i+1] = det Gram(b_0..b_i), lam[k][j] = D[j+1] mu_kj."""
    n = len(rows)
    D = [1] + [0] * n
    lam = [[0] * n for _ in range(n)]
    for k in range(n):
        for j in range(k + 1):
            u = _idot(rows[k], rows[j])
            for i in range(j):
                u = (D[i + 1] * u - lam[k][i] * lam[j][i]) // D[i]
            if j < k:
                lam[k][j] = u
            else:
                if u == 0:
                    raise DependentRowsError(f"row {k} depends on the previous rows")
                D[k + 1] = u
    return D, lam


def gram_schmidt(basis: LatticeBasis, params: ReductionParams | None = None) -> GsoData:
    params = params or ReductionParams()
    if params.precision == "exact":
        rows = basis.rows
        n, m = basis.nrows, basis.ncols
        D, lam = _integral_gso(rows)
        mu = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                mu[i, j] = Fraction(lam[i][j], D[j + 1]) if j < i else Fraction(int(i == j))
        norms = np.array([Fraction(D[i + 1], D[i]) for i in range(n)], dtype=object)
        bstar = np.empty((n, m), dtype=object)
        for i in range(n):
            v = [Fraction(x) for x in rows[i]]
            for j in range(i):
                if mu[i, j]:
                    v = [a - mu[i, j] * b for a, b in zip(v, bstar[j])]
            bstar[i] = v
        return GsoData(bstar=bstar, mu=mu, norms=norms, exact=True)
    B = basis.as_int64().astype(np.float64)
    n = B.shape[0]
    Q, R = np.linalg.qr(B.T)
    diag = np.diag(R).copy()
    if np.any(np.abs(diag) <= 1e-9 * max(1.0, np.abs(diag).max())):
        raise DependentRowsError("basis rows are (numerically) dependent")
    mu = (R / diag[:, np.newaxis]).T  # mu[i, j] = R[j, i] / R[j, j]
    mu = np.tril(mu)
    np.fill_diagonal(mu, 1.0)
    bstar = (Q * diag[np.newaxis, :]).T
    return GsoData(bstar=bstar, mu=mu, norms=diag**2, exact=False)


# ------------------------------------------------------------------------ LLL

def _lll_exact(rows: list[list[int]], delta: Fraction) -> tuple[list[list[int]], list[list[int]]]:
    """Integral LLL (Cohen, Algorithm 2.6.7). Returns (basis, transform)."""
    b = [list(r) for r in rows]
    n = len(b)
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    if n <= 1:
        return b, U
    a_num, a_den = delta.numerator, delta.denominator
    D = [1] + [0] * n
    lam = [[0] * n for _ in range(n)]

    def gso_row(k):
        for j in range(k + 1):
            u = _idot(b[k], b[j])
            for i in range(j):
                u = (D[i + 1] * u - lam[k][i] * lam[j][i]) // D[i]
            if j < k:
                lam[k][j] = u
            elif u == 0:
                raise DependentRowsError(f"row {k} depends on the previous rows")
            else:
                D[k + 1] = u

    def red(k, l):
        if 2 * abs(lam[k][l]) > D[l + 1]:
            qq = (2 * lam[k][l] + D[l + 1]) // (2 * D[l + 1])
            b[k] = [x - qq * y for x, y in zip(b[k], b[l])]
            U[k] = [x - qq * y for x, y in zip(U[k], U[l])]
            lam[k][l] -= qq * D[l + 1]
            for i in range(l):
                lam[k][i] -= qq * lam[l][i]

    def swap(k, kmax):
        b[k], b[k - 1] = b[k - 1], b[k]
        U[k], U[k - 1] = U[k - 1], U[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lm = lam[k][k - 1]
        new = (D[k - 1] * D[k + 1] + lm * lm) // D[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (D[k + 1] * lam[i][k - 1] - lm * t) // D[k]
            lam[i][k - 1] = (new * t + lm * lam[i][k]) // D[k + 1]
        D[k] = new

    gso_row(0)
    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            gso_row(k)
        red(k, k - 1)
        lm = lam[k][k - 1]
        if a_den * D[k + 1] * D[k - 1] < a_num * D[k] * D[k] - a_den * lm * lm:
            swap(k, kmax)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return b, U


def _lll_float(basis: LatticeBasis, delta: float) -> tuple[np.ndarray, np.ndarray]:
    B = basis.as_int64()
    n = B.shape[0]
    U = np.eye(n, dtype=np.int64)
    # a hair above delta so that the exact Lovasz test with delta still holds
    inner = min(delta + 1e-6, 0.999999)
    status = _kernels.lll_float(B, U, inner, 10**9)
    if status == _kernels.STATUS_DEPENDENT:
        raise DependentRowsError("basis rows are (numerically) dependent")
    if status != _kernels.STATUS_OK:
        raise PrecisionError(f"float LLL did not converge (status {status})")
    if np.abs(B).max() >= _FLOAT_ENTRY_LIMIT:
        raise PrecisionError("entries grew beyond the float kernel's safe range")
    return B, U


def lll_reduce_with_transform(basis: LatticeBasis, params: ReductionParams | None = None):
    """LLL-reduce; returns (reduced basis, U) with reduced = U * basis."""
    params = params or ReductionParams()
    if params.precision == "exact":
        b, U = _lll_exact(basis.rows, params.delta_fraction)
        return LatticeBasis(b), U
    B, U = _lll_float(basis, params.delta)
    U = U.tolist()
    reduced = LatticeBasis(B.tolist())
    # the transform lives in int64 and could wrap; check it reproduces the output
    if any(basis.combine(U[i]) != list(reduced._rows[i]) for i in range(basis.nrows)):
        raise PrecisionError("unimodular transform overflowed int64")
    return reduced, U


def lll_reduce(basis: LatticeBasis, params: ReductionParams | None = None) -> LatticeBasis:
    params = params or ReductionParams()
    if params.precision == "exact":
        return LatticeBasis(_lll_exact(basis.rows, params.delta_fraction)[0])
    return LatticeBasis(_lll_float(basis, params.delta)[0].tolist())


def is_size_reduced(gso: GsoData, eta=Fraction(1, 2)) -> bool:
    n = gso.rank
    return all(abs(gso.mu[i, j]) <= eta for i in range(n) for j in range(i))


def satisfies_lovasz(gso: GsoData, delta) -> bool:
    """delta |b*_{i-1}|^2 <= |b*_i + mu_{i,i-1} b*_{i-1}|^2 for every i."""
    if gso.exact:
        delta = Fraction(str(delta)) if isinstance(delta, float) else Fraction(delta)
    N, mu = gso.norms, gso.mu
    return all(delta * N[i - 1] <= N[i] + mu[i, i - 1] ** 2 * N[i - 1] for i in range(1, gso.rank))


def is_lll_reduced(basis: LatticeBasis, delta=0.99) -> bool:
    gso = gram_schmidt(basis, ReductionParams(precision="exact"))
    return is_size_reduced(gso) and satisfies_lovasz(gso, delta)


# ---------------------------------------------------------------------- Babai

def _target_coords(gso: GsoData, target: Sequence) -> np.ndarray:
    if gso.exact:
        t = [Fraction(v) for v in target]
        return np.array(
            [sum((a * b for a, b in zip(t, gso.bstar[i])), Fraction(0)) / gso.norms[i] for i in range(gso.rank)],
            dtype=object,
        )
    t = np.asarray(target, dtype=np.float64)
    return (gso.bstar @ t) / gso.norms


def _round_half_to_zero(c: Fraction) -> int:
    f = math.floor(c)
    frac = c - f
    if frac > Fraction(1, 2):
        return f + 1
    if frac < Fraction(1, 2):
        return f
    return f if f >= 0 else f + 1


def babai_coefficients(gso: GsoData, target: Sequence) -> list[int]:
    tc = _target_coords(gso, target)
    if not gso.exact:
        return _kernels.babai_coeffs(np.ascontiguousarray(gso.mu), tc).tolist()
    c = list(tc)
    x = [0] * gso.rank
    for i in range(gso.rank - 1, -1, -1):
        x[i] = _round_half_to_zero(c[i])
        for j in range(i):
            c[j] -= x[i] * gso.mu[i, j]
    return x


def babai_nearest_plane(basis: LatticeBasis, gso: GsoData, target: Sequence) -> list[int]:
    """Lattice vector w near target with |w - t|^2 <= (1/4) sum |b*_i|^2.

    Rounding ties (fractional part exactly 1/2) go toward zero.
    """
    if len(target) != basis.ncols:
        raise DimensionMismatchError(f"target has length {len(target)}, basis has {basis.ncols} columns")
    if gso.rank != basis.nrows:
        raise DimensionMismatchError("GSO does not belong to this basis")
    x = babai_coefficients(gso, target)
    w = basis.combine(x)
    dist2 = sum((Fraction(a) - Fraction(b)) ** 2 for a, b in zip(w, target))
    bound = sum(gso.norms) / 4
    if gso.exact:
        ok = dist2 <= bound
    else:
        ok = float(dist2) <= float(bound) * (1 + 1e-9) + 1e-9
    if not ok:
        raise PrecisionError("nearest-plane distance bound violated; GSO is inaccurate")
    return w


# ----------------------------------------------------------------- enumeration

@dataclass(frozen=True)
class EnumResult:
    vectors: list[list[int]]
    coeffs: list[list[int]]  # w.r.t. the input basis
    dist2: list[int]
    nodes: int


def _block_preprocess(B: np.ndarray, U: np.ndarray, beta: int, max_tours: int = 16) -> None:
    """Strengthen an LLL-reduced basis in place before full enumeration.

    Each tour enumerates the projected block [k, k+beta) and, when it holds a
    vector shorter than 0.99 |b*_k|, inserts it at position k (dropping a row
    whose coefficient is +-1, so the change is unimodular) and re-runs LLL.
    Only the enumeration cost changes; the lattice is the same.
    """
    n = B.shape[0]
    for _ in range(max_tours):
        changed = False
        for k in range(n - 1):
            kend = min(k + beta, n)
            gso = gram_schmidt(LatticeBasis(B), ReductionParams(precision="float"))
            mu = np.ascontiguousarray(gso.mu[k:kend, k:kend])
            rr = np.ascontiguousarray(gso.norms[k:kend])
            sols, dists, count, _, status = _kernels.enumerate_short(
                mu, rr, np.zeros(kend - k), 0.99 * rr[0], True, True, 1024, 10**9
            )
            if count == 0 or status != _kernels.STATUS_OK:
                continue
            x = sols[int(np.argmin(dists))]
            ones = np.flatnonzero(np.abs(x) == 1)
            if len(ones) == 0:
                continue
            j = k + int(ones[-1])
            v = x @ B[k:kend]
            uv = x @ U[k:kend]
            B[k + 1 : j + 1] = B[k:j].copy()
            U[k + 1 : j + 1] = U[k:j].copy()
            B[k], U[k] = v, uv
            status = _kernels.lll_float(B, U, 0.99, 10**9)
            if status != _kernels.STATUS_OK:
                raise PrecisionError(f"LLL failed during block preprocessing (status {status})")
            changed = True
        if not changed:
            return


@dataclass(frozen=True)
class EnumContext:
    """Reduced basis, transform and GSO prepared once for repeated exact SVP/CVP calls."""

    basis: LatticeBasis
    reduced: LatticeBasis
    U: list
    gso: GsoData


def prepare_enum(basis: LatticeBasis) -> EnumContext:
    return EnumContext(basis, *_reduced_for_enum(basis))


def _context(basis) -> EnumContext:
    return basis if isinstance(basis, EnumContext) else prepare_enum(basis)


def _reduced_for_enum(basis: LatticeBasis):
    if basis.nrows > ENUM_RANK_CAP:
        raise RankTooLargeError(f"rank {basis.nrows} exceeds the enumeration cap {ENUM_RANK_CAP}")
    params = ReductionParams(precision="exact") if basis.max_abs() >= _FLOAT_ENTRY_LIMIT else ReductionParams()
    red, U = lll_reduce_with_transform(basis, params)
    if red.nrows > 30 and red.max_abs() < _FLOAT_ENTRY_LIMIT:
        B = red.as_int64()
        Ua = np.array(U, dtype=np.int64)
        _block_preprocess(B, Ua, beta=20)
        U = Ua.tolist()
        red = LatticeBasis(B.tolist())
        if any(basis.combine(U[i]) != list(red._rows[i]) for i in range(basis.nrows)):
            raise PrecisionError("unimodular transform overflowed int64")
    gso = gram_schmidt(red, ReductionParams(precision="float"))
    return red, U, gso


def _run_enum(gso: GsoData, tc, radius2: float, svp: bool, shrink: bool, cap: int = 1 << 16,
              max_nodes: int = 10**12):
    sols, dists, count, nodes, status = _kernels.enumerate_short(
        np.ascontiguousarray(gso.mu, dtype=np.float64),
        np.ascontiguousarray(gso.norms, dtype=np.float64),
        np.ascontiguousarray(tc, dtype=np.float64),
        float(radius2), svp, shrink, cap, max_nodes,
    )
    if status == _kernels.STATUS_BUFFER_FULL:
        raise LatticeError(f"more than {cap} lattice vectors inside the enumeration radius")
    if status != _kernels.STATUS_OK:
        raise LatticeError("enumeration node budget exhausted")
    return sols, nodes


def _finish(red: LatticeBasis, U, sols, target=None):
    """Exact distances for enumerated candidates, sorted by (distance, input coefficients)."""
    out = []
    for x in sols.tolist():
        v = red.combine(x)
        d2 = sum((a - (target[i] if target is not None else 0)) ** 2 for i, a in enumerate(v))
        coeffs = [sum(x[i] * U[i][j] for i in range(len(x))) for j in range(len(x))]
        out.append((d2, coeffs, v))
    out.sort(key=lambda t: (t[0], t[1]))
    return out


def svp_exact(basis: LatticeBasis | EnumContext) -> tuple[list[int], float]:
    """A shortest nonzero lattice vector and lambda_1.

    Depth-first Schnorr-Euchner enumeration; the radius starts at the first
    vector of an LLL-reduced basis and shrinks whenever something shorter shows
    up.  Among vectors of equal length the one with the lexicographically
    smallest input-basis coefficients wins, up to the overall sign, which is
    normalised so the first nonzero entry of the vector is positive.
    """
    ctx = _context(basis)
    red, U, gso = ctx.reduced, ctx.U, ctx.gso
    r2 = sum(v * v for v in red.rows[0])
    sols, _ = _run_enum(gso, np.zeros(red.nrows), r2 * (1 + 1e-9) + 1e-9, svp=True, shrink=True)
    if len(sols) == 0:
        raise PrecisionError("enumeration missed the LLL vector; GSO is inaccurate")
    cands = []
    for d2, coeffs, v in _finish(red, U, sols):
        if next(a for a in v if a) < 0:
            v, coeffs = [-a for a in v], [-c for c in coeffs]
        cands.append((d2, coeffs, v))
    d2, _, v = min(cands, key=lambda t: (t[0], t[1]))
    return v, math.sqrt(d2)


def cvp_exact(basis: LatticeBasis | EnumContext, target: Sequence[int]) -> list[int]:
    """A lattice vector closest to target; ties go to the lexicographically
    smallest coefficient vector w.r.t. the input basis."""
    ctx = _context(basis)
    basis = ctx.basis
    if len(target) != basis.ncols:
        raise DimensionMismatchError("target length does not match the basis")
    if basis.nrows != basis.ncols:
        raise DimensionMismatchError("cvp_exact needs a full-rank square basis")
    red, U, gso = ctx.reduced, ctx.U, ctx.gso
    target = [int(t) for t in target]
    w = babai_nearest_plane(red, gso, target)
    r2 = sum((a - b) ** 2 for a, b in zip(w, target))
    tc = _target_coords(gso, target)
    sols, _ = _run_enum(gso, tc, r2 * (1 + 1e-9) + 1e-6, svp=False, shrink=True)
    if len(sols) == 0:
        raise PrecisionError("enumeration missed the Babai vector; GSO is inaccurate")
    return _finish(red, U, sols, target)[0][2]


def enumerate_ball(basis: LatticeBasis | EnumContext, radius: float, cap: int = 1 << 16) -> EnumResult:
    """All nonzero lattice vectors with norm <= radius, one of each +-pair."""
    ctx = _context(basis)
    red, U, gso = ctx.reduced, ctx.U, ctx.gso
    r2 = radius * radius
    sols, nodes = _run_enum(gso, np.zeros(red.nrows), r2 * (1 + 1e-9) + 1e-9, svp=True, shrink=False, cap=cap)
    found = [(d2, c, v) for d2, c, v in _finish(red, U, sols) if d2 <= r2]
    return EnumResult(
        vectors=[v for _, _, v in found],
        coeffs=[c for _, c, _ in found],
        dist2=[d for d, _, _ in found],
        nodes=nodes,
    )


def coefficient_box(basis: LatticeBasis, radius: float, center: Sequence[float] | None = None):
    """Per-coordinate integer ranges guaranteed to contain every x with
    |x B - center| <= radius: x_i = <v, d_i> for the dual basis rows d_i."""
    n = basis.nrows
    X = solve_rows(basis.rows, [[int(i == j) for j in range(n)] for i in range(n)])
    # X B = I, so the columns of X are the dual vectors d_i (rows of B^{-T})
    ranges = []
    for i in range(n):
        d = [float(X[j][i]) for j in range(n)]
        dn = math.sqrt(sum(v * v for v in d))
        mid = 0.0 if center is None else sum(c * dv for c, dv in zip(center, d))
        lo = math.floor(mid - radius * dn - 1e-9)
        hi = math.ceil(mid + radius * dn + 1e-9)
        ranges.append(range(lo, hi + 1))
    return ranges


def brute_force_closest(basis: LatticeBasis, target: Sequence[int] | None, radius: float):
    """Minimum over every integer combination in the coefficient box.

    With target None this is SVP (zero excluded).  Returns (dist2, vector).
    """
    box = coefficient_box(basis, radius, None if target is None else [float(t) for t in target])
    B = np.array(basis.rows, dtype=np.int64)
    t = np.zeros(basis.ncols, dtype=np.int64) if target is None else np.array(target, dtype=np.int64)
    best = None
    # chunk over the first coordinate to bound memory
    rest = [np.array(r, dtype=np.int64) for r in box[1:]]
    grid = np.array(np.meshgrid(*rest, indexing="ij")).reshape(len(rest), -1).T if rest else np.zeros((1, 0), np.int64)
    for x0 in box[0]:
        X = np.hstack([np.full((grid.shape[0], 1), x0, dtype=np.int64), grid])
        V = X @ B - t
        d2 = (V * V).sum(axis=1)
        if target is None:
            d2 = np.where(np.all(X == 0, axis=1), np.iinfo(np.int64).max, d2)
        i = int(np.argmin(d2))
        if best is None or d2[i] < best[0]:
            best = (int(d2[i]), (V[i] + t).tolist())
    return best


def box_size(ranges) -> int:
    return math.prod(len(r) for r in ranges)


def random_unimodular(n: int, rng: np.random.Generator, steps: int = 20) -> list[list[int]]:
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        i, j = rng.choice(n, size=2, replace=False)
        c = int(rng.integers(-2, 3))
        U[i] = [a + c * b for a, b in zip(U[i], U[j])]
    return U


def iter_small_combinations(n: int, rng: np.random.Generator, count: int, bound: int = 1):
    for _ in range(count):
        x = rng.integers(-bound, bound + 1, size=n)
        if np.any(x):
            yield x.tolist()


