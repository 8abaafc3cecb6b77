import itertools

import numpy as np
import pytest

from mintime.johnson import (_nearest_in_hull_py, hull_weights, merge_vertex,
                             nearest_in_hull)


def brute_min_norm(vertices, grid=60):
    """Dense barycentric-grid search (independent oracle)."""
    V = np.asarray(vertices, dtype=float)
    best = np.inf
    for weights in itertools.product(range(grid + 1), repeat=len(V)):
        total = sum(weights)
        if total == 0:
            continue
        x = np.asarray(weights, dtype=float) @ V / total
        best = min(best, float(x @ x))
    return best


def simplex_gd_min_norm(vertices, iters=1500):
    """Projected-gradient upper bound on the squared hull distance.

    Feasible at every iterate, so the returned value can only overestimate
    the true minimum; paired with the exact variational-inequality
    certificate this brackets the answer from both sides.
    """
    V = np.asarray(vertices, dtype=float)
    m = V.shape[0]
    lam = np.full(m, 1.0 / m)
    G = V @ V.T
    L = 2.0 * float(np.linalg.eigvalsh(G).max()) + 1e-12
    for _ in range(iters):
        lam = lam - 2.0 * (G @ lam) / L
        u = np.sort(lam)[::-1]
        css = np.cumsum(u) - 1.0
        rho = np.nonzero(u - css / np.arange(1, m + 1) > 0)[0][-1]
        lam = np.maximum(lam - css[rho] / (rho + 1), 0.0)
    x = lam @ V
    return float(x @ x)


def test_singleton():
    s, kept = nearest_in_hull([np.array([3.0, 4.0])])
    assert np.allclose(s, [3, 4])
    assert len(kept) == 1


def test_symmetric_pair():
    s, kept = nearest_in_hull([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
    assert np.allclose(s, [0.5, 0.5])
    assert len(kept) == 2


def test_origin_inside_triangle():
    V = [np.array([1.0, 1.0]), np.array([-1.0, 1.0]), np.array([0.0, -1.0])]
    s, kept = nearest_in_hull(V)
    assert np.linalg.norm(s) <= 1e-12
    assert len(kept) <= 3


def test_vertex_optimum_matches_brute_force():
    V = [np.array([2.0, 0.0]), np.array([3.0, 0.0]), np.array([2.0, 1.0])]
    s, kept = nearest_in_hull(V)
    assert np.allclose(s, [2, 0], atol=1e-12)
    assert len(kept) == 1
    assert float(s @ s) == pytest.approx(brute_min_norm(V), abs=1e-3)


def test_rejects_empty_and_oversized():
    with pytest.raises(ValueError, match="empty"):
        nearest_in_hull([])
    with pytest.raises(ValueError, match="at most"):
        nearest_in_hull([np.array([float(i), 0.0]) for i in range(4)])


def test_duplicates_merged():
    v = np.array([1.0, 2.0])
    s, kept = nearest_in_hull([v, v + 5e-15, v.copy()])
    assert np.allclose(s, v)
    assert len(kept) == 1
    out = merge_vertex([v], v + 5e-15)
    assert len(out) == 1


def test_oracle_equivalence_bulk():
    # never worse than the feasible oracle, and exactly optimal by the
    # projection variational inequality: together this pins |s| to the true
    # hull distance within 1e-6
    rng = np.random.default_rng(99)
    checked = 0
    for n in (2, 3, 4):
        for _ in range(340):
            m = int(rng.integers(1, n + 2))
            V = [rng.standard_normal(n) * 2 for _ in range(m)]
            s, _ = nearest_in_hull(V)
            norm = float(np.linalg.norm(s))
            assert norm <= np.sqrt(simplex_gd_min_norm(V)) + 1e-6
            # dist^2 >= |s|^2 + 2 slack for every hull point, so the
            # certificate bounds the undershoot far below 1e-6
            slack = min(float(s @ (v - s)) for v in V)
            assert slack >= -1e-10
            checked += 1
    assert checked >= 1000


def test_projection_optimality_condition():
    rng = np.random.default_rng(5)
    for n in (2, 3, 4):
        for _ in range(120):
            m = int(rng.integers(1, n + 2))
            V = [rng.standard_normal(n) * 3 for _ in range(m)]
            s, _ = nearest_in_hull(V)
            for v in V:
                assert float(s @ (v - s)) >= -1e-10


def test_kept_reduction_has_positive_weights():
    rng = np.random.default_rng(17)
    for _ in range(200):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, n + 2))
        V = [rng.standard_normal(n) * 2 for _ in range(m)]
        s, kept = nearest_in_hull(V)
        lam = hull_weights(s, kept)
        assert float(np.min(lam)) >= 1e-12
        assert np.allclose(lam @ np.asarray(kept), s, atol=1e-9)


def test_kept_small_when_origin_outside():
    rng = np.random.default_rng(3)
    for _ in range(150):
        n = int(rng.integers(2, 5))
        m = n + 1
        V = [rng.standard_normal(n) + 4.0 for _ in range(m)]  # shifted away
        s, kept = nearest_in_hull(V)
        if float(s @ s) > 1e-10:  # origin not enclosed
            assert len(kept) <= n


def test_kernel_matches_reference():
    rng = np.random.default_rng(31)
    for _ in range(400):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, n + 2))
        V = [rng.standard_normal(n) * 2 for _ in range(m)]
        s1, k1 = nearest_in_hull(V)
        merged = []
        for v in V:
            merged = merge_vertex(merged, v)
        s2, k2 = _nearest_in_hull_py(merged)
        assert np.max(np.abs(s1 - s2)) <= 1e-12
        assert len(k1) == len(k2)
