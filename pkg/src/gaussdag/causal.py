"""Causal effects of hard interventions in the linear Gaussian SEM.

A hard intervention on a target set I cuts every edge into the intervened
nodes; on the coefficient matrix L this zeroes the corresponding columns
except their unit diagonal. The post-intervention distribution is Gaussian
with precision (L^I) D^-1 (L^I)', and the total effect on a response Y of
shifting target h is the regression quotient Sigma^I[h, Y] / Sigma^I[h, h].
In the linear Gaussian case the effect does not depend on the intervention
levels, so they never enter this API.

All node arguments are 1-based labels.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .dagwishart import CholParams
from .errors import (
    CollapsedChainError,
    EmptyChainError,
    QueryError,
    ShapeError,
)
from .mcmc import Chain


@dataclass(frozen=True)
class CausalQuery:
    """An ordered intervention target set and a response node outside it."""

    targets: tuple[int, ...]
    response: int

    def __post_init__(self):
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "response", int(self.response))
        if len(targets) == 0:
            raise QueryError("target set must be nonempty")
        if len(set(targets)) != len(targets):
            raise QueryError("target set contains duplicate labels")
        if any(t < 1 for t in targets) or self.response < 1:
            raise QueryError("node labels are 1-based and must be positive")
        if self.response in targets:
            raise QueryError("response node must not be an intervention target")

    def check_q(self, q: int) -> None:
        if any(t > q for t in self.targets) or self.response > q:
            raise QueryError(f"query labels exceed the node count q={q}")


def intervention_L(L, targets) -> np.ndarray:
    """Coefficient matrix of the intervention graph.

    Zeroes every column belonging to a target node except its diagonal
    entry; everything else is copied unchanged.
    """
    mat = np.array(L, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ShapeError(f"L must be square, got shape {mat.shape}")
    q = mat.shape[0]
    for t in targets:
        t = int(t)
        if not 1 <= t <= q:
            raise IndexError(f"target label {t} outside 1..{q}")
        keep = mat[t - 1, t - 1]
        mat[:, t - 1] = 0.0
        mat[t - 1, t - 1] = keep
    return mat


def _as_dvec(D, q: int) -> np.ndarray:
    d = np.asarray(D, dtype=np.float64)
    if d.ndim == 2:
        if d.shape != (q, q):
            raise ShapeError(f"D must be {q}x{q} or a length-{q} vector")
        d = np.diag(d)
    elif d.ndim != 1 or d.size != q:
        raise ShapeError(f"D must be {q}x{q} or a length-{q} vector")
    return d


def causal_effect(targets, response: int, L, D) -> np.ndarray:
    """Total effects on the response of a joint intervention on the targets.

    Returns one coefficient per target, in target order. ``D`` may be the
    diagonal matrix of conditional variances or just its diagonal.
    """
    query = CausalQuery(tuple(int(t) for t in targets), response)
    Lmat = np.asarray(L, dtype=np.float64)
    if Lmat.ndim != 2 or Lmat.shape[0] != Lmat.shape[1]:
        raise ShapeError(f"L must be square, got shape {Lmat.shape}")
    q = Lmat.shape[0]
    query.check_q(q)
    dvec = _as_dvec(D, q)
    li = intervention_L(Lmat, query.targets)
    omega = (li / dvec[np.newaxis, :]) @ li.T
    omega = (omega + omega.T) / 2.0
    sigma = cho_solve(cho_factor(omega, lower=True), np.eye(q))
    y0 = query.response - 1
    return np.array(
        [sigma[t - 1, y0] / sigma[t - 1, t - 1] for t in query.targets]
    )


@dataclass(frozen=True, eq=False)
class CausalDraws:
    """Per-draw effect coefficients: one row per chain state, one column per target."""

    values: np.ndarray
    targets: tuple[int, ...]
    response: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[1] != len(self.targets):
            raise ShapeError("values must be (draws, targets)-shaped")
        object.__setattr__(self, "values", vals)

    @property
    def column_labels(self) -> list[str]:
        return [f"h = {t}" for t in self.targets]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.column_labels)
            for row in self.values:
                writer.writerow([f"{x:.17g}" for x in row])


def posterior_causal_effects(chain: Chain, query: CausalQuery) -> CausalDraws:
    """Effect coefficients evaluated at every retained (D, L) draw."""
    if not chain.has_params:
        raise CollapsedChainError(
            "causal effects need parameter draws; rerun with collapse=False"
        )
    query.check_q(chain.q)
    out = np.empty((len(chain), len(query.targets)))
    for s in range(len(chain)):
        par = chain.params(s)
        out[s] = causal_effect(query.targets, query.response, par.L, par.dvec)
    return CausalDraws(out, query.targets, query.response)


def bma_causal_effect(draws: CausalDraws) -> np.ndarray:
    """Model-averaged effect estimate: column means of the per-draw effects."""
    if draws.values.shape[0] == 0:
        raise EmptyChainError("no draws to average")
    return draws.values.mean(axis=0)
