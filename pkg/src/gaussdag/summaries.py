"""Posterior summaries of a chain and convergence-diagnostic series.

Summaries are frequency-based: edge-inclusion probabilities average the
per-state adjacency indicators, the MAP graph is the most visited state, and
the median-probability model keeps edges whose probability strictly exceeds
0.5. Diagnostics are emitted as plot-ready tables, never images.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyChainError
from .graph import Dag
from .mcmc import Chain


def _require_states(chain: Chain) -> None:
    if len(chain) == 0:
        raise EmptyChainError("chain holds no retained states")


def edge_probabilities(chain: Chain) -> np.ndarray:
    """(q, q) matrix of posterior edge-inclusion frequencies."""
    _require_states(chain)
    return chain.adjacency_stack().mean(axis=0)


def map_dag(chain: Chain) -> Dag:
    """The most frequently visited DAG.

    Ties break deterministically on the packed adjacency bitstring
    (lexicographically smallest wins).
    """
    _require_states(chain)
    counts: dict[bytes, int] = {}
    for s in range(len(chain)):
        key = chain._dag_bits[s].tobytes()
        counts[key] = counts.get(key, 0) + 1
    best = max(counts.items(), key=lambda kv: (kv[1], [-b for b in kv[0]]))
    bits = np.frombuffer(best[0], dtype=np.uint8)
    adj = np.unpackbits(bits, count=chain.q * chain.q).reshape(chain.q, chain.q)
    return Dag(adj)


def mpm_dag(chain: Chain) -> np.ndarray:
    """Median-probability model: edges with inclusion probability > 0.5.

    Returns a 0/1 matrix rather than a Dag: edgewise medians can violate
    acyclicity, so callers needing a graph must validate. Probabilities of
    exactly 0.5 are excluded (strict threshold).
    """
    return (edge_probabilities(chain) > 0.5).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class DiagnosticsReport:
    """Convergence series of one chain.

    ``size_trace[s]`` is the edge count of state s; ``running_mean_size`` its
    cumulative mean. ``running_edge_probs(v)`` returns the (S, q) matrix of
    cumulative inclusion frequencies of every edge u -> v, computed on
    demand to keep large runs memory-stable.
    """

    size_trace: np.ndarray
    running_mean_size: np.ndarray
    _chain: Chain = field(repr=False)

    @property
    def q(self) -> int:
        return self._chain.q

    def running_edge_probs(self, v: int) -> np.ndarray:
        """Cumulative frequency of each u -> v over the first s states."""
        if not 1 <= v <= self.q:
            raise IndexError(f"node label {v} outside 1..{self.q}")
        occ = self._chain.adjacency_stack()[:, :, v - 1].astype(np.float64)
        denom = np.arange(1, occ.shape[0] + 1, dtype=np.float64)[:, np.newaxis]
        return np.cumsum(occ, axis=0) / denom

    def write_csv(self, out_dir) -> list[str]:
        """Write sizetrace.csv plus one edgeprobs_running_v<k>.csv per node."""
        os.makedirs(out_dir, exist_ok=True)
        written = []
        steps = np.arange(1, self.size_trace.size + 1)
        trace = np.column_stack([steps, self.size_trace, self.running_mean_size])
        path = os.path.join(out_dir, "sizetrace.csv")
        np.savetxt(
            path,
            trace,
            delimiter=",",
            fmt=["%d", "%d", "%.17g"],
            header="s,size,running_mean",
            comments="",
        )
        written.append(path)
        for v in range(1, self.q + 1):
            path = os.path.join(out_dir, f"edgeprobs_running_v{v}.csv")
            header = ",".join(f"u{u}" for u in range(1, self.q + 1))
            np.savetxt(
                path,
                self.running_edge_probs(v),
                delimiter=",",
                fmt="%.17g",
                header=header,
                comments="",
            )
            written.append(path)
        return written


def diagnostics(chain: Chain) -> DiagnosticsReport:
    """Edge-count trace and running means for convergence monitoring."""
    _require_states(chain)
    sizes = chain.adjacency_stack().sum(axis=(1, 2)).astype(np.int64)
    running = np.cumsum(sizes, dtype=np.float64) / np.arange(1, sizes.size + 1)
    return DiagnosticsReport(sizes, running, chain)


def structural_hamming_distance(a, b) -> int:
    """Edge insertions, deletions and flips separating two 0/1 graphs.

    A present-vs-absent disagreement counts 1; an edge present in both but
    with opposite orientation counts 1 (a flip), not 2.
    """
    x = np.asarray(a, dtype=np.uint8)
    y = np.asarray(b, dtype=np.uint8)
    if x.shape != y.shape:
        raise ValueError("graphs must have equal shape")
    iu = np.triu_indices(x.shape[0], k=1)
    differs = (x[iu] != y[iu]) | (x.T[iu] != y.T[iu])
    return int(differs.sum())


def save_edge_probabilities_csv(chain: Chain, path) -> None:
    """q x q edge-probability matrix as plain CSV."""
    np.savetxt(path, edge_probabilities(chain), delimiter=",", fmt="%.17g")
