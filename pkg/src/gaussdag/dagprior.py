"""Bernoulli-skeleton prior over DAG space.

Each of the q(q-1)/2 skeleton slots holds an edge independently with
probability w, so log p(D) is known up to a constant; only ratios and
unnormalized sums are ever needed outside the small-q enumeration oracle.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateError, DomainError
from .graph import Dag, Operator, OpKind


def check_edge_probability(w: float) -> float:
    """Validate an edge-inclusion probability for log-ratio use (0 < w < 1)."""
    w = float(w)
    if not 0.0 <= w <= 1.0:
        raise DomainError(f"edge probability must be in [0, 1], got {w}")
    if w in (0.0, 1.0):
        raise DegenerateError(
            "edge probability 0 or 1 makes every move ratio degenerate; "
            "choose 0 < w < 1"
        )
    return w


def log_prior(dag: Dag, w: float) -> float:
    """Unnormalized log prior of a DAG under the Bernoulli skeleton model.

    A DAG's skeleton has exactly as many edges as the DAG itself.
    """
    w = check_edge_probability(w)
    m = dag.num_edges
    slots = dag.q * (dag.q - 1) // 2
    return m * np.log(w) + (slots - m) * np.log1p(-w)


def log_prior_ratio(op: Operator, w: float) -> float:
    """log p(D') - log p(D) for a single-move transition.

    Insertion adds one skeleton edge, deletion removes one, reversal leaves
    the skeleton unchanged.
    """
    w = check_edge_probability(w)
    if op.kind == OpKind.INSERT:
        return float(np.log(w) - np.log1p(-w))
    if op.kind == OpKind.DELETE:
        return float(np.log1p(-w) - np.log(w))
    return 0.0
