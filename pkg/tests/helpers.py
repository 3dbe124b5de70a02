"""Independent reference routines shared by the test suite.

Everything here is written the dumb, obviously-correct way so it can serve
as an oracle for the fast library paths.
"""

from __future__ import annotations

import numpy as np

from gaussdag import (
    CholParams,
    CycleError,
    Dag,
    apply_operator,
    enumerate_possible_operators,
)

# Worked example used throughout: a 4-node graph 4 -> {2, 3} -> 1 with one
# known parameter draw (values hand-checked against the path rule).
WORKED_DAG = Dag.from_edges(4, [(2, 1), (3, 1), (4, 2), (4, 3)])
WORKED_L = np.array(
    [
        [1.000000, 0.00000000, 0.000000, 0.0],
        [1.169280, 1.00000000, 0.000000, 0.0],
        [-1.659849, 0.00000000, 1.000000, 0.0],
        [0.000000, -0.05807009, -1.379419, 1.0],
    ]
)
WORKED_D = np.diag([0.9651437, 0.2840032, 1.188965, 5.890211])
WORKED_EFFECT_34_ON_1 = (1.65984864, -0.06790017)


def brute_valid_operators(dag: Dag):
    """Valid moves found by literally applying every possible move."""
    out = []
    for group in enumerate_possible_operators(dag):
        for op in group:
            try:
                apply_operator(dag, op)
            except CycleError:
                continue
            out.append(op)
    return out


def det_cofactor(m: np.ndarray) -> float:
    """Recursive cofactor-expansion determinant (dim <= 4 in practice)."""
    m = np.asarray(m, dtype=np.float64)
    n = m.shape[0]
    if n == 0:
        return 1.0
    if n == 1:
        return float(m[0, 0])
    total = 0.0
    for j in range(n):
        minor = np.delete(np.delete(m, 0, axis=0), j, axis=1)
        total += (-1.0) ** j * m[0, j] * det_cofactor(minor)
    return total


def weighted_ks(x: np.ndarray, w: np.ndarray, y: np.ndarray) -> float:
    """sup_t |F_w(t) - G(t)| between a weighted and a plain empirical CDF."""
    w = np.asarray(w, dtype=np.float64)
    w = w / w.sum()
    grid = np.sort(np.concatenate([x, y]))
    order = np.argsort(x)
    cum_w = np.cumsum(w[order])
    fx = np.interp(grid, x[order], cum_w, left=0.0, right=1.0)
    gy = np.searchsorted(np.sort(y), grid, side="right") / y.size
    return float(np.abs(fx - gy).max())


def simulate_intervention(
    dag: Dag,
    params: CholParams,
    targets: tuple[int, ...],
    values: dict,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw n rows of the post-intervention SEM by topological propagation.

    Intervened nodes are clamped to ``values[label]`` (scalar or length-n
    array); the rest follow their structural equations with fresh noise.
    """
    q = dag.q
    L, d = params.L, params.dvec
    X = np.zeros((n, q))
    for j in dag.topological_order():
        j0 = j - 1
        if j in targets:
            X[:, j0] = np.broadcast_to(np.asarray(values[j], dtype=np.float64), (n,))
            continue
        pa = np.flatnonzero(dag.adj[:, j0])
        mean = -X[:, pa] @ L[pa, j0] if pa.size else 0.0
        X[:, j0] = mean + rng.standard_normal(n) * np.sqrt(d[j0])
    return X


def ols_with_se(Z: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """OLS with intercept: slope estimates and their standard errors."""
    n = Z.shape[0]
    design = np.column_stack([np.ones(n), Z])
    beta, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    dof = n - design.shape[1]
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(design.T @ design)
    return beta[1:], np.sqrt(np.diag(cov))[1:]
