"""Numba kernels for the floating-point lattice routines.

Bases are int64 row matrices; Gram-Schmidt data is float64.  Callers in
``lattice`` are responsible for overflow checks and exact post-verification.
"""

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_LOOP_LIMIT = 1
STATUS_SIZE_REDUCTION_STUCK = 2
STATUS_DEPENDENT = 3
STATUS_BUFFER_FULL = 4


@njit(cache=True)
def _dot(u, v):
    s = 0
    for i in range(u.shape[0]):
        s += u[i] * v[i]
    return s


@njit(cache=True)
def _gso_row(B, k, mu, r):
    # r[k, j] = <b_k, b*_j>, mu[k, j] = r[k, j] / r[j, j], r[k, k] = |b*_k|^2
    for j in range(k + 1):
        g = float(_dot(B[k], B[j]))
        for l in range(j):
            g -= mu[j, l] * r[k, l]
        r[k, j] = g
        if j < k:
            mu[k, j] = g / r[j, j]
    mu[k, k] = 1.0


@njit(cache=True)
def lll_float(B, U, delta, max_loops):
    """In-place Schnorr-Euchner style LLL. U receives the same row operations."""
    n = B.shape[0]
    mu = np.zeros((n, n))
    r = np.zeros((n, n))
    if n == 0:
        return STATUS_OK
    _gso_row(B, 0, mu, r)
    if r[0, 0] <= 0.0:
        return STATUS_DEPENDENT
    k = 1
    loops = 0
    while k < n:
        loops += 1
        if loops > max_loops:
            return STATUS_LOOP_LIMIT
        stuck = True
        for _ in range(64):
            _gso_row(B, k, mu, r)
            changed = False
            for j in range(k - 1, -1, -1):
                m = mu[k, j]
                # slack so an exact tie at 1/2 cannot flip back and forth on rounding noise
                if abs(m) > 0.5 + 1e-7:
                    x = np.int64(np.round(m))
                    B[k] -= x * B[j]
                    U[k] -= x * U[j]
                    for l in range(j):
                        mu[k, l] -= x * mu[j, l]
                    mu[k, j] -= x
                    changed = True
            if not changed:
                stuck = False
                break
        if stuck:
            return STATUS_SIZE_REDUCTION_STUCK
        if r[k, k] <= 0.0:
            return STATUS_DEPENDENT
        m = mu[k, k - 1]
        if delta * r[k - 1, k - 1] > r[k, k] + m * m * r[k - 1, k - 1]:
            for c in range(B.shape[1]):
                t = B[k, c]
                B[k, c] = B[k - 1, c]
                B[k - 1, c] = t
            for c in range(U.shape[1]):
                t = U[k, c]
                U[k, c] = U[k - 1, c]
                U[k - 1, c] = t
            if k == 1:
                _gso_row(B, 0, mu, r)
            else:
                k -= 1
        else:
            k += 1
    return STATUS_OK


@njit(cache=True)
def round_half_to_zero(c):
    f = np.floor(c)
    frac = c - f
    if frac > 0.5:
        return f + 1.0
    if frac < 0.5:
        return f
    # exact tie: toward zero
    return f if f >= 0.0 else f + 1.0


@njit(cache=True)
def babai_coeffs(mu, tc):
    """Nearest-plane rounding; tc holds the target's coordinates along b*_i."""
    n = tc.shape[0]
    c = tc.copy()
    x = np.zeros(n, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        xi = round_half_to_zero(c[i])
        x[i] = np.int64(xi)
        for j in range(i):
            c[j] -= xi * mu[i, j]
    return x


@njit(cache=True)
def enumerate_short(mu, rr, tc, radius2, svp, shrink, cap, max_nodes):
    """Schnorr-Euchner enumeration of integer x with |sum x_i b_i - t|^2 <= radius2.

    Coordinates are w.r.t. the Gram-Schmidt basis: mu is lower triangular,
    rr[i] = |b*_i|^2 and tc[i] = <t, b*_i> / rr[i].  With svp=True the target
    is ignored, zero is skipped and only one of +-x is visited.  With
    shrink=True the radius tightens to each solution found (times 1 + 1e-9 so
    ties survive).  Returns (solutions, dists, count, nodes, status).
    """
    n = mu.shape[0]
    sols = np.zeros((cap, n), dtype=np.int64)
    dists = np.zeros(cap)
    count = 0
    nodes = 0
    status = STATUS_OK
    R2 = radius2
    x = np.zeros(n, dtype=np.int64)
    w = np.zeros(n, dtype=np.int64)
    c = np.zeros(n)
    part = np.zeros(n + 1)
    sig = np.zeros((n + 1, n))
    hi = np.full(n, n - 1, dtype=np.int64)
    for k in range(n):
        sig[n, k] = 0.0 if svp else tc[k]
        for j in range(n):
            sig[j, k] = sig[n, k]
    last_nonzero = 0
    if svp:
        k = 0
        x[0] = 1
        c[0] = 0.0
        w[0] = 1
    else:
        k = n - 1
        c[k] = tc[k]
        x[k] = np.int64(np.round(c[k]))
        w[k] = 1
    while True:
        nodes += 1
        if nodes > max_nodes:
            status = STATUS_LOOP_LIMIT
            break
        diff = x[k] - c[k]
        rho = part[k + 1] + diff * diff * rr[k]
        go_up = False
        if rho <= R2:
            if k == 0:
                if count == cap:
                    # drop stale entries before giving up
                    keep = 0
                    for s in range(count):
                        if dists[s] <= R2:
                            sols[keep] = sols[s]
                            dists[keep] = dists[s]
                            keep += 1
                    count = keep
                if count == cap:
                    status = STATUS_BUFFER_FULL
                    break
                sols[count] = x
                dists[count] = rho
                count += 1
                if shrink:
                    R2 = min(R2, rho * (1.0 + 1e-9) + 1e-9)
            else:
                part[k] = rho
                k -= 1
                if hi[k] < hi[k + 1]:
                    hi[k] = hi[k + 1]
                for j in range(hi[k], k, -1):
                    sig[j, k] = sig[j + 1, k] - x[j] * mu[j, k]
                c[k] = sig[k + 1, k]
                x[k] = np.int64(np.round(c[k]))
                w[k] = 1
                continue
        else:
            go_up = True
        if go_up:
            k += 1
            if k == n:
                break
            hi[k - 1] = k
        if svp and k >= last_nonzero:
            last_nonzero = k
            x[k] += 1
        else:
            if x[k] > c[k]:
                x[k] -= w[k]
            else:
                x[k] += w[k]
            w[k] += 1
    return sols[:count].copy(), dists[:count].copy(), count, nodes, status
