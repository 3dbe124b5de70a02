"""Synthetic-data generation: random DAGs, SEM coefficients, Gaussian samples.

The structural equation model is L' x = eps with eps ~ N(0, D), so data rows
are zero-mean Gaussian with covariance (L D^-1 L')^-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dagwishart import CholParams
from .errors import DomainError, ShapeError
from .graph import Dag
from .numkernel import gram


@dataclass(frozen=True, eq=False)
class Dataset:
    """An (n, q) data matrix with its Gram matrix X'X cached."""

    X: np.ndarray
    gram: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        x = np.asarray(self.X, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] < 1:
            raise ShapeError(f"data must be a 2-D matrix, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ShapeError("data contains non-finite entries")
        x.setflags(write=False)
        object.__setattr__(self, "X", x)
        g = gram(x) if self.gram is None else np.asarray(self.gram, dtype=np.float64)
        g.setflags(write=False)
        object.__setattr__(self, "gram", g)

    @classmethod
    def from_array(cls, X) -> "Dataset":
        return cls(np.asarray(X, dtype=np.float64))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def q(self) -> int:
        return self.X.shape[1]

    def to_csv(self, path, header: bool = True) -> None:
        """One row per observation; optional header X1..Xq."""
        head = ",".join(f"X{j + 1}" for j in range(self.q)) if header else ""
        np.savetxt(path, self.X, delimiter=",", fmt="%.17g", header=head, comments="")

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        """Read a CSV data matrix, tolerating an optional header row."""
        try:
            mat = np.loadtxt(path, delimiter=",", ndmin=2)
        except ValueError:
            mat = np.loadtxt(path, delimiter=",", ndmin=2, skiprows=1)
        return cls.from_array(mat)


@dataclass(frozen=True, eq=False)
class SemSpec:
    """A ground-truth SEM: graph, parameters and the coefficient range used."""

    dag: Dag
    params: CholParams
    l_min: float
    l_max: float


def rand_dag(q: int, w: float, rng: np.random.Generator) -> Dag:
    """Random DAG with lower-triangular adjacency.

    Each pair u > v carries the edge u -> v independently with probability
    w, so the result is acyclic by construction and the printed matrix is
    strictly lower triangular.
    """
    if q < 1:
        raise DomainError("node count must be positive")
    if not 0.0 <= w <= 1.0:
        raise DomainError(f"edge probability must be in [0, 1], got {w}")
    adj = np.zeros((q, q), dtype=np.uint8)
    lower = np.tril_indices(q, k=-1)
    draws = rng.random(len(lower[0])) < w
    adj[lower] = draws.astype(np.uint8)
    return Dag(adj)


def rand_sem_params(
    dag: Dag, l_min: float, l_max: float, dvals, rng: np.random.Generator
) -> CholParams:
    """SEM coefficients uniform in [l_min, l_max] on the DAG's edges.

    The noise variances are taken verbatim from ``dvals``. Signed ranges are
    allowed; the magnitude ordering |l_min| <= |l_max| is not required, only
    l_min <= l_max.
    """
    if l_min > l_max:
        raise DomainError("coefficient range must satisfy l_min <= l_max")
    d = np.asarray(dvals, dtype=np.float64).ravel()
    if d.size != dag.q:
        raise ShapeError(f"need {dag.q} noise variances, got {d.size}")
    if not np.all(d > 0.0):
        raise DomainError("noise variances must be positive")
    L = np.eye(dag.q)
    cells = np.argwhere(dag.adj)
    if cells.size:
        L[cells[:, 0], cells[:, 1]] = rng.uniform(l_min, l_max, size=cells.shape[0])
    return CholParams.from_vectors(L, d)


def sample_data(n: int, params: CholParams, rng: np.random.Generator) -> Dataset:
    """n i.i.d. zero-mean Gaussian rows with covariance (L D^-1 L')^-1.

    Rows are generated by solving the structural equations L' x = eps
    directly, which realizes the target distribution without forming the
    covariance.
    """
    if n < 1:
        raise DomainError("sample size must be at least 1")
    q = params.q
    eps = rng.standard_normal((n, q)) * np.sqrt(params.dvec)[np.newaxis, :]
    X = np.linalg.solve(params.L.T, eps.T).T
    return Dataset.from_array(X)
