"""Nearest point to the origin in the convex hull of at most n+1 points.

This is the simplex subproblem inside the polytope distance algorithms.  The
vertex count never exceeds n+1 (5 in the benchmark), so instead of the
classic recursive determinant bookkeeping we enumerate every nonempty face,
solve the equality-constrained least-norm problem on its affine hull, and
keep the best face whose barycentric weights are strictly positive.
Exhaustive enumeration is slightly slower but markedly more robust at these
sizes.  Faces of one and two vertices get closed forms; larger faces go
through the Gram-matrix KKT system.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

__all__ = ["merge_vertex", "nearest_in_hull", "hull_weights"]

#: Vertices closer than this are considered duplicates and merged.
MERGE_TOL = 1e-14
#: Pivot tolerance for detecting affinely dependent faces.
PIVOT_TOL = 1e-12
#: A face only counts if every barycentric weight is at least this.
WEIGHT_TOL = 1e-12
#: Two faces within this relative squared-norm difference tie; the smaller
#: face wins (keeps the vertex set lean without blocking late progress).
TIE_REL_TOL = 1e-12

# Index subsets by (vertex count, face size), in lexicographic order; the
# enumeration visits small faces first, so ties keep the leanest face.
_PAIRS = {m: list(combinations(range(m), 2)) for m in range(2, 8)}
_FACES = {
    (m, k): np.array(list(combinations(range(m), k)))
    for m in range(3, 8) for k in range(3, m + 1)
}

_ONE = np.array([1.0])


def merge_vertex(vertices: list[np.ndarray], v: np.ndarray) -> list[np.ndarray]:
    """Append ``v`` unless an existing vertex matches it within MERGE_TOL."""
    for w in vertices:
        if float(np.max(np.abs(w - v))) <= MERGE_TOL:
            return vertices
    return vertices + [np.asarray(v, dtype=float)]


def _face_weights(G: np.ndarray, idx) -> tuple | None:
    """Barycentric weights of the least-norm point on the affine hull of the
    face, via the KKT system on the Gram matrix.

    Returns ``(weights, norm2)`` or ``None`` for an affinely dependent
    (degenerate) face.
    """
    k = len(idx)
    sub = G[np.ix_(idx, idx)]
    M = np.empty((k + 1, k + 1))
    M[:k, :k] = 2.0 * sub
    M[:k, k] = 1.0
    M[k, :k] = 1.0
    M[k, k] = 0.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)):
        return None
    scale = max(1.0, float(np.max(np.abs(M))))
    if float(np.max(np.abs(M @ sol - rhs))) > PIVOT_TOL * scale * 1e3:
        return None
    lam = sol[:k]
    norm2 = float(lam @ sub @ lam)
    return lam, norm2


def _faces_of_size(G: np.ndarray, m: int, k: int):
    """All size-k faces at once: one stacked KKT solve.

    Yields ``(idx, lam, norm2)`` for every nondegenerate face, in
    lexicographic order of the index subsets.
    """
    idxs = _FACES[(m, k)]
    nb = idxs.shape[0]
    sub = G[idxs[:, :, None], idxs[:, None, :]]
    M = np.zeros((nb, k + 1, k + 1))
    M[:, :k, :k] = 2.0 * sub
    M[:, :k, k] = 1.0
    M[:, k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(
            M, np.broadcast_to(rhs.reshape(1, k + 1, 1), (nb, k + 1, 1)))[..., 0]
    except np.linalg.LinAlgError:
        # a singular member poisons the whole batch; fall back per face
        for row in idxs:
            res = _face_weights(G, tuple(row))
            if res is not None:
                yield tuple(row), res[0], res[1]
        return
    residual = np.max(np.abs(np.einsum("bij,bj->bi", M, sol) - rhs), axis=1)
    scale = np.maximum(1.0, np.max(np.abs(M), axis=(1, 2)))
    ok = (np.all(np.isfinite(sol), axis=1)
          & (residual <= PIVOT_TOL * scale * 1e3))
    lam = sol[:, :k]
    norm2 = np.einsum("bi,bij,bj->b", lam, sub, lam)
    for i in range(nb):
        if ok[i]:
            yield tuple(idxs[i]), lam[i], float(norm2[i])


def nearest_in_hull(vertices) -> tuple[np.ndarray, list[np.ndarray]]:
    """Nearest point of ``conv(vertices)`` to the origin.

    Parameters
    ----------
    vertices : sequence of (n,) arrays
        1 to n+1 points (duplicates within MERGE_TOL are merged).

    Returns
    -------
    s : (n,) array
        The unique nearest point to the origin.
    kept : list of (n,) arrays
        The vertices of the face whose relative interior contains ``s``;
        ``s`` is a strictly positive convex combination of ``kept``.
    """
    merged: list[np.ndarray] = []
    for v in vertices:
        merged = merge_vertex(merged, np.asarray(v, dtype=float))
    m = len(merged)
    if m == 0:
        raise ValueError("empty vertex set")
    n = merged[0].size
    if m > n + 1:
        raise ValueError(f"at most {n + 1} vertices supported, got {m}")

    from . import _kernels
    if _kernels.HAVE_NUMBA:
        s, mask = _kernels.nearest_in_hull_kernel(
            np.asarray(merged), _kernels.FACE_MASKS[m])
        return s, [merged[i] for i in range(m) if mask & (1 << i)]
    return _nearest_in_hull_py(merged)


def _nearest_in_hull_py(merged: list[np.ndarray]):
    """Reference implementation (also the no-numba fallback)."""
    m = len(merged)
    V = np.asarray(merged)
    G = V @ V.T

    # singleton faces come for free from the Gram diagonal
    best_idx = (0,)
    best_norm2 = float(G[0, 0])
    best_lam = _ONE
    for i in range(1, m):
        norm2 = float(G[i, i])
        if norm2 < best_norm2 * (1.0 - TIE_REL_TOL):
            best_idx = (i,)
            best_norm2 = norm2

    # segment faces in closed form
    if m >= 2 and best_norm2 > 0.0:
        for i, j in _PAIRS[m]:
            gii = float(G[i, i])
            gij = float(G[i, j])
            gjj = float(G[j, j])
            denom = gii - 2.0 * gij + gjj  # |v_i - v_j|^2
            if denom <= 0.0:
                continue
            mu = (gjj - gij) / denom
            if mu < WEIGHT_TOL or 1.0 - mu < WEIGHT_TOL:
                continue
            norm2 = mu * (mu * gii + (1.0 - mu) * gij) \
                + (1.0 - mu) * (mu * gij + (1.0 - mu) * gjj)
            if norm2 < 0.0:
                norm2 = 0.0
            if norm2 < best_norm2 * (1.0 - TIE_REL_TOL):
                best_idx, best_norm2, best_lam = (i, j), norm2, (mu, 1.0 - mu)

    # larger faces, smallest size first so ties keep the leanest face
    for k in range(3, m + 1):
        if best_norm2 == 0.0:
            break
        for idx, lam, norm2 in _faces_of_size(G, m, k):
            if float(np.min(lam)) < WEIGHT_TOL:
                continue
            if norm2 < 0.0:
                norm2 = 0.0
            if norm2 < best_norm2 * (1.0 - TIE_REL_TOL):
                best_idx, best_norm2, best_lam = idx, norm2, np.asarray(lam)

    lam = np.asarray(best_lam, dtype=float)
    s = lam @ V[list(best_idx)]
    return s, [merged[i] for i in best_idx]


def hull_weights(s: np.ndarray, kept) -> np.ndarray:
    """Barycentric weights reconstructing ``s`` from ``kept`` (for checks)."""
    P = np.asarray(kept, dtype=float)
    k = P.shape[0]
    A = np.vstack([P.T, np.ones(k)])
    b = np.concatenate([np.asarray(s, dtype=float), [1.0]])
    lam, *_ = np.linalg.lstsq(A, b, rcond=None)
    return lam
