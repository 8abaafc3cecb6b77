"""Jitted inner loops for the rocket benchmark.

The fixed-step integrators dominate the benchmark runtime (tens of
thousands of RK4 steps per solve at the smallest step size), so the rocket
specializations of the two integration loops are compiled with numba.  They
mirror the generic implementations in :mod:`mintime.dynamics` operation for
operation; the test suite asserts agreement.  When numba is unavailable the
callers silently fall back to the generic paths.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["HAVE_NUMBA", "rocket_boost", "rocket_contact_rk4"]

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap


# face bitmasks for 1..7 vertices, smallest faces first then lexicographic,
# so the jitted hull search visits subsets in the same order as the
# reference implementation
def _masks_by_size(m: int):
    masks = []
    for mask in range(1, 1 << m):
        masks.append((bin(mask).count("1"), mask))
    masks.sort()
    return np.array([mk for _, mk in masks], dtype=np.int64)


FACE_MASKS = {m: _masks_by_size(m) for m in range(1, 8)}


@njit(cache=True)
def nearest_in_hull_kernel(V, masks):
    """Nearest point of conv(rows of V) to the origin.

    Mirrors the reference enumeration: every face (index subset) in the
    given order, equality-constrained least-norm solve on its affine hull
    via Gaussian elimination, keep the best face with all barycentric
    weights >= 1e-12, requiring a relative improvement of 1e-12 so that
    ties favor earlier (leaner) faces.  Returns (s, best_mask).
    """
    m = V.shape[0]
    G = V @ V.T
    best_norm2 = np.inf
    best_mask = 0
    best_lam = np.zeros(m)
    idx = np.empty(m, dtype=np.int64)
    M = np.empty((m + 1, m + 1))
    rhs = np.empty(m + 1)
    sol = np.empty(m + 1)
    for mi in range(masks.shape[0]):
        mask = masks[mi]
        k = 0
        for i in range(m):
            if mask & (1 << i):
                idx[k] = i
                k += 1
        if k == 1:
            i = idx[0]
            norm2 = G[i, i]
            if norm2 < best_norm2 * (1.0 - 1e-12):
                best_norm2 = norm2
                best_mask = mask
                for q in range(m):
                    best_lam[q] = 0.0
                best_lam[i] = 1.0
            continue
        if best_norm2 == 0.0:
            break
        # KKT system: [[2 G_sub, 1], [1^T, 0]] [lam; mu] = [0; 1]
        for r in range(k):
            for c in range(k):
                M[r, c] = 2.0 * G[idx[r], idx[c]]
            M[r, k] = 1.0
            rhs[r] = 0.0
        for c in range(k):
            M[k, c] = 1.0
        M[k, k] = 0.0
        rhs[k] = 1.0
        size = k + 1
        # Gaussian elimination with partial pivoting on a copy
        A = M[:size, :size].copy()
        b = rhs[:size].copy()
        singular = False
        for col in range(size):
            piv = col
            pv = abs(A[col, col])
            for r in range(col + 1, size):
                if abs(A[r, col]) > pv:
                    pv = abs(A[r, col])
                    piv = r
            if pv <= 1e-300:
                singular = True
                break
            if piv != col:
                for c in range(size):
                    tmp = A[col, c]
                    A[col, c] = A[piv, c]
                    A[piv, c] = tmp
                tmp = b[col]
                b[col] = b[piv]
                b[piv] = tmp
            inv = 1.0 / A[col, col]
            for r in range(col + 1, size):
                f = A[r, col] * inv
                if f != 0.0:
                    for c in range(col, size):
                        A[r, c] -= f * A[col, c]
                    b[r] -= f * b[col]
        if singular:
            continue
        for r in range(size - 1, -1, -1):
            acc = b[r]
            for c in range(r + 1, size):
                acc -= A[r, c] * sol[c]
            sol[r] = acc / A[r, r]
        finite = True
        for r in range(size):
            if not np.isfinite(sol[r]):
                finite = False
        if not finite:
            continue
        # residual and weight screening as in the reference
        scale = 1.0
        for r in range(size):
            for c in range(size):
                if abs(M[r, c]) > scale:
                    scale = abs(M[r, c])
        resid = 0.0
        for r in range(size):
            acc = -rhs[r]
            for c in range(size):
                acc += M[r, c] * sol[c]
            if abs(acc) > resid:
                resid = abs(acc)
        if resid > 1e-12 * scale * 1e3:
            continue
        ok = True
        for r in range(k):
            if sol[r] < 1e-12:
                ok = False
                break
        if not ok:
            continue
        norm2 = 0.0
        for r in range(k):
            for c in range(k):
                norm2 += sol[r] * G[idx[r], idx[c]] * sol[c]
        if norm2 < 0.0:
            norm2 = 0.0
        if norm2 < best_norm2 * (1.0 - 1e-12):
            best_norm2 = norm2
            best_mask = mask
            for q in range(m):
                best_lam[q] = 0.0
            for r in range(k):
                best_lam[idx[r]] = sol[r]
    n = V.shape[1]
    s = np.zeros(n)
    for i in range(m):
        if best_lam[i] != 0.0:
            for c in range(n):
                s[c] += best_lam[i] * V[i, c]
    return s, best_mask


@njit(cache=True)
def _u_dir(p3, p4, k3, k4, h):
    """Unit thrust along (p3, p4); at the abnormal point, select the control
    along the adjoint flow by nudging with the local slope (k3, k4)."""
    n = math.hypot(p3, p4)
    if n == 0.0:
        p3 = p3 + (h * 2.0 ** -30) * k3
        p4 = p4 + (h * 2.0 ** -30) * k4
        n = math.hypot(p3, p4)
    return p3 / n, p4 / n


@njit(cache=True)
def _joint_step(t, h, p, s):
    """One forward RK4 step of adjoint + extremal state, rocket dynamics.

    pdot = -p A = (0, 0, p3 - p1, p4 - p2);
    sdot = (vx, vy, -vx + ux, -vy + uy) with (ux, uy) = unit(p3, p4).
    """
    p1, p2, p3, p4 = p[0], p[1], p[2], p[3]
    x, y, vx, vy = s[0], s[1], s[2], s[3]

    k1p3 = p3 - p1
    k1p4 = p4 - p2
    q3 = p3 + 0.5 * h * k1p3
    q4 = p4 + 0.5 * h * k1p4
    k2p3 = q3 - p1
    k2p4 = q4 - p2
    r3 = p3 + 0.5 * h * k2p3
    r4 = p4 + 0.5 * h * k2p4
    k3p3 = r3 - p1
    k3p4 = r4 - p2
    w3 = p3 + h * k3p3
    w4 = p4 + h * k3p4
    k4p3 = w3 - p1
    k4p4 = w4 - p2

    u1x, u1y = _u_dir(p3, p4, k1p3, k1p4, h)
    k1x = vx
    k1y = vy
    k1vx = -vx + u1x
    k1vy = -vy + u1y

    u2x, u2y = _u_dir(q3, q4, k2p3, k2p4, h)
    sx = vx + 0.5 * h * k1vx
    sy = vy + 0.5 * h * k1vy
    k2x = sx
    k2y = sy
    k2vx = -sx + u2x
    k2vy = -sy + u2y

    u3x, u3y = _u_dir(r3, r4, k3p3, k3p4, h)
    tx = vx + 0.5 * h * k2vx
    ty = vy + 0.5 * h * k2vy
    k3x = tx
    k3y = ty
    k3vx = -tx + u3x
    k3vy = -ty + u3y

    u4x, u4y = _u_dir(w3, w4, k4p3, k4p4, h)
    zx = vx + h * k3vx
    zy = vy + h * k3vy
    k4x = zx
    k4y = zy
    k4vx = -zx + u4x
    k4vy = -zy + u4y

    h6 = h / 6.0
    p_out = np.empty(4)
    s_out = np.empty(4)
    p_out[0] = p1
    p_out[1] = p2
    p_out[2] = p3 + h6 * (k1p3 + 2.0 * k2p3 + 2.0 * k3p3 + k4p3)
    p_out[3] = p4 + h6 * (k1p4 + 2.0 * k2p4 + 2.0 * k3p4 + k4p4)
    s_out[0] = x + h6 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    s_out[1] = y + h6 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
    s_out[2] = vx + h6 * (k1vx + 2.0 * k2vx + 2.0 * k3vx + k4vx)
    s_out[3] = vy + h6 * (k1vy + 2.0 * k2vy + 2.0 * k3vy + k4vy)
    return p_out, s_out


@njit(cache=True)
def _adjoint_step_back(t, h, p):
    """One backward RK4 step of pdot = -p A (rocket); p1, p2 invariant."""
    p1, p2, p3, p4 = p[0], p[1], p[2], p[3]
    k1p3 = p3 - p1
    k1p4 = p4 - p2
    q3 = p3 - 0.5 * h * k1p3
    q4 = p4 - 0.5 * h * k1p4
    k2p3 = q3 - p1
    k2p4 = q4 - p2
    r3 = p3 - 0.5 * h * k2p3
    r4 = p4 - 0.5 * h * k2p4
    k3p3 = r3 - p1
    k3p4 = r4 - p2
    w3 = p3 - h * k3p3
    w4 = p4 - h * k3p4
    k4p3 = w3 - p1
    k4p4 = w4 - p2
    h6 = h / 6.0
    out = np.empty(4)
    out[0] = p1
    out[1] = p2
    out[2] = p3 - h6 * (k1p3 + 2.0 * k2p3 + 2.0 * k3p3 + k4p3)
    out[3] = p4 - h6 * (k1p4 + 2.0 * k2p4 + 2.0 * k3p4 + k4p4)
    return out


@njit(cache=True)
def rocket_boost(t, p, s, tau, g1, g2, gv1, gv2, t_cap):
    """Boost search against a point target ``(g1 + gv1 t, g2 + gv2 t, gv1, gv2)``.

    Returns (t_hold, p_hold, s_hold, span, diverged); the hold triple is the
    last one satisfying the separation sign condition before it failed.
    """
    t_hold = t
    p_hold = p.copy()
    s_hold = s.copy()
    p = p.copy()
    s = s.copy()
    span = 0.0
    diverged = False
    while True:
        gap = (p[0] * (g1 + gv1 * t - s[0]) + p[1] * (g2 + gv2 * t - s[1])
               + p[2] * (gv1 - s[2]) + p[3] * (gv2 - s[3]))
        if not gap > 0.0:
            break
        t_hold = t
        p_hold = p.copy()
        s_hold = s.copy()
        if t + tau > t_cap:
            diverged = True
            break
        p, s = _joint_step(t, tau, p, s)
        t += tau
        span += tau
    return t_hold, p_hold, s_hold, span, diverged


@njit(cache=True)
def rocket_contact_rk4(t, p, v0, tau):
    """Rocket specialization of the two-loop contact approximation."""
    T = t
    p = p.copy()
    s = np.zeros(4)
    s[2] = v0
    while t > 0.0:
        h = tau if t >= tau else t
        p = _adjoint_step_back(t, h, p)
        t -= h
    t = 0.0
    while t < T:
        h = tau if T - t >= tau else T - t
        p, s = _joint_step(t, h, p, s)
        t += h
    return s
