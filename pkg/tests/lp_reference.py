"""Brute-force reference for small LPs and a generator of random test programs."""
import itertools

import numpy as np

from bellmd.lp import LinearProgram


def vertex_max(lp):
    """Brute force: best feasible point among all basic solutions.

    Returns None when no vertex is feasible. Only valid for bounded
    programs with independent equality rows, which is how the random
    programs below are built.
    """
    n = lp.n
    G = np.vstack([lp.A_ub, -np.eye(n)])
    h = np.concatenate([lp.b_ub, -lp.lower])
    k = n - lp.A_eq.shape[0]
    combos = list(itertools.combinations(range(G.shape[0]), k))
    combos = np.array(combos, dtype=int).reshape(len(combos), k)
    K = combos.shape[0]
    A = np.concatenate([np.broadcast_to(lp.A_eq, (K,) + lp.A_eq.shape), G[combos]], axis=1)
    b = np.concatenate([np.broadcast_to(lp.b_eq, (K, lp.b_eq.size)), h[combos]], axis=1)
    ok = np.abs(np.linalg.det(A)) > 1e-9
    if not ok.any():
        return None
    x = np.linalg.solve(A[ok], b[ok][..., None])[..., 0]
    feasible = np.all(x @ G.T <= h + 1e-9, axis=1)
    if lp.A_eq.size:
        feasible &= np.all(np.abs(x @ lp.A_eq.T - lp.b_eq) <= 1e-9, axis=1)
    if not feasible.any():
        return None
    return float(np.max(x[feasible] @ lp.objective))


def random_lp(rng):
    n = int(rng.integers(1, 9))
    m_eq = int(rng.integers(0, min(n, 2) + 1))
    m_ub = int(rng.integers(0, 4))
    c = rng.normal(size=n)
    # integer data makes degenerate vertices common
    if rng.random() < 0.5:
        c = np.round(c * 2)
    lower = np.where(rng.random(n) < 0.7, 0.0, rng.integers(-3, 1, size=n).astype(float))
    x0 = lower + rng.random(n) * 2  # interior-ish point keeps most programs feasible
    A_eq = rng.integers(-2, 3, size=(m_eq, n)).astype(float)
    while m_eq and np.linalg.matrix_rank(A_eq) < m_eq:
        A_eq = rng.integers(-2, 3, size=(m_eq, n)).astype(float)
    b_eq = A_eq @ x0
    if rng.random() < 0.1 and m_eq:
        b_eq = b_eq + 5.0  # occasionally infeasible
    A_ub = rng.integers(-3, 4, size=(m_ub, n)).astype(float)
    b_ub = A_ub @ x0 + rng.integers(0, 3, size=m_ub)
    box = np.eye(n)
    A_ub = np.vstack([A_ub, box])
    b_ub = np.concatenate([b_ub, lower + 4.0])
    return LinearProgram(c, A_eq, b_eq, A_ub, b_ub, lower)
