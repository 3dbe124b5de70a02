"""Brute-force reference implementations for auditing the fast paths.

Everything here is deliberately direct: exhaustive enumeration over graphs,
Monte Carlo integration against the prior, and explicit path enumeration.
Slow by design, correct by construction; usable on small problems only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .dagprior import log_prior
from .dagwishart import DagWishartHyper, dag_log_marginal
from .errors import QueryError, TooLargeError
from .graph import Dag, enumerate_all_dags
from .simulate import Dataset


@dataclass(frozen=True, eq=False)
class ExactPosterior:
    """The fully enumerated posterior over all DAGs on q <= 4 nodes."""

    dags: list[Dag]
    probs: np.ndarray
    log_normalizer: float

    @property
    def q(self) -> int:
        return self.dags[0].q

    def prob_of(self, dag: Dag) -> float:
        for d, p in zip(self.dags, self.probs):
            if d == dag:
                return float(p)
        raise KeyError("graph not on the support (different q?)")

    def edge_marginals(self) -> np.ndarray:
        """(q, q) matrix of exact posterior edge-inclusion probabilities."""
        out = np.zeros((self.q, self.q))
        for d, p in zip(self.dags, self.probs):
            out += p * d.adj
        return out


def exact_posterior(data: Dataset, hyper: DagWishartHyper, w: float) -> ExactPosterior:
    """Normalized posterior over every DAG, by exhaustive scoring.

    Scores each graph by marginal likelihood plus structure prior and
    normalizes with log-sum-exp. Limited to q <= 4.
    """
    q = data.q
    if q > 4:
        raise TooLargeError("exact posterior enumeration supports q <= 4")
    dags = enumerate_all_dags(q)
    scores = np.array(
        [dag_log_marginal(d, data.gram, data.n, hyper) + log_prior(d, w) for d in dags]
    )
    log_z = float(logsumexp(scores))
    return ExactPosterior(dags, np.exp(scores - log_z), log_z)


def _chol(mat: np.ndarray) -> np.ndarray:
    # deliberate: plain numpy, no shared kernel code
    return np.linalg.cholesky(mat)


def mc_marginal_likelihood(
    dag: Dag,
    data: Dataset,
    hyper: DagWishartHyper,
    ndraws: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Prior-predictive Monte Carlo estimate of the log marginal likelihood.

    Draws (D, L) from the prior ndraws times, evaluates the exact Gaussian
    likelihood of the data for each draw, and averages on the probability
    scale. Returns (log estimate, jackknife standard error of the log
    estimate). High variance by construction; sized for q <= 2 and tiny n.
    """
    q, n = data.q, data.n
    if n * q > 40:
        warnings.warn(
            "prior-predictive Monte Carlo variance grows quickly with n*q; "
            f"n*q={n * q} exceeds 40",
            stacklevel=2,
        )
    a, U = hyper.a, hyper.U
    X = data.X
    loglik = np.zeros(ndraws)
    for j0 in range(q):
        pa = np.flatnonzero(dag.adj[:, j0])
        p = pa.size
        a_j = a + p - q + 1
        if p:
            upa = U[np.ix_(pa, pa)]
            upj = U[pa, j0]
            upa_inv = np.linalg.inv(upa)
            schur = float(U[j0, j0] - upj @ upa_inv @ upj)
            mean = -upa_inv @ upj
            cov_factor = _chol(upa_inv)
        else:
            schur = float(U[j0, j0])
        # D_jj ~ Inverse-Gamma(a_j/2, schur/2), vectorized over draws
        d = (0.5 * schur) / rng.gamma(0.5 * a_j, 1.0, size=ndraws)
        if p:
            z = rng.standard_normal((ndraws, p))
            lcols = mean[np.newaxis, :] + np.sqrt(d)[:, np.newaxis] * (z @ cov_factor.T)
            resid = X[:, j0][np.newaxis, :] + lcols @ X[:, pa].T
        else:
            resid = np.broadcast_to(X[:, j0], (ndraws, n))
        loglik += -0.5 * n * np.log(2.0 * np.pi * d) - (resid**2).sum(axis=1) / (2.0 * d)
    total = float(logsumexp(loglik))
    estimate = total - np.log(ndraws)
    # delete-one jackknife on the log scale
    ratio = np.exp(loglik - total)
    loo = total + np.log1p(-np.clip(ratio, None, 1.0 - 1e-15)) - np.log(ndraws - 1)
    se = float(np.sqrt((ndraws - 1) / ndraws * ((loo - loo.mean()) ** 2).sum()))
    return float(estimate), se


def _paths_effect(adj: np.ndarray, L: np.ndarray, h0: int, y0: int) -> float:
    """Sum over directed paths h -> ... -> y of the product of -L entries."""
    total = 0.0
    stack = [(h0, 1.0)]
    while stack:
        node, weight = stack.pop()
        if node == y0:
            total += weight
            continue
        for child in np.flatnonzero(adj[node, :]):
            stack.append((int(child), weight * (-L[node, child])))
    return total


def path_coefficient_effect(dag: Dag, L, targets, response: int) -> np.ndarray:
    """Path-rule causal effects: per target, sum of path products of -L.

    Paths run in the intervention graph (edges into any target removed), so
    no path can pass through another intervened node. Exhaustive DFS.
    """
    q = dag.q
    targets = tuple(int(t) for t in targets)
    if len(targets) == 0 or len(set(targets)) != len(targets):
        raise QueryError("targets must be nonempty and duplicate-free")
    if response in targets:
        raise QueryError("response node must not be an intervention target")
    if any(not 1 <= t <= q for t in targets) or not 1 <= response <= q:
        raise QueryError(f"labels outside 1..{q}")
    Lmat = np.asarray(L, dtype=np.float64)
    adj = dag.adj.copy()
    for t in targets:
        adj[:, t - 1] = 0
    y0 = response - 1
    return np.array([_paths_effect(adj, Lmat, t - 1, y0) for t in targets])
