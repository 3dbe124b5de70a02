"""Compatible conjugate prior and posterior for Gaussian DAG parameters.

The precision matrix of a Gaussian DAG model factors as Omega = L D^-1 L'
(modified Cholesky decomposition), with L unit-diagonal and supported on the
graph's edges, and D the diagonal matrix of conditional variances. The prior
places, independently per node j with parent set pa(j):

    D_jj            ~ Inverse-Gamma(a_j / 2, U_{jj|pa(j)} / 2)
    L_{pa(j), j}|D  ~ Normal(-U_{pa,pa}^-1 U_{pa,j},  D_jj U_{pa,pa}^-1)

where U is an s.p.d. rate matrix, U_{jj|pa} the Schur complement of the
parent block, and the node shapes follow the compatibility rule
a_j = a + |pa(j)| - q + 1 with common shape a > q - 1. Under this rule any
two Markov equivalent DAGs receive the same marginal likelihood.

Conjugacy with n zero-mean Gaussian rows X gives the posterior by the update
(a, U) -> (a + n, U + X'X), and the node marginal likelihood in closed form
as a ratio of prior and posterior normalizing constants.

Inverse-Gamma is (shape, rate) parameterized throughout: mean rate/(shape-1).
Node arguments are 1-based labels; everything else is plain arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

from .errors import DomainError, HyperError, NotSpdError, ShapeError
from .graph import Dag
from .numkernel import as_spd, cholesky_lower

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class DagWishartHyper:
    """Common shape a and s.p.d. rate matrix U; requires a > q - 1."""

    a: float
    U: np.ndarray

    def __post_init__(self):
        u = as_spd(self.U, name="rate matrix U")
        u.setflags(write=False)
        object.__setattr__(self, "U", u)
        object.__setattr__(self, "a", float(self.a))
        if not self.a > self.q - 1:
            raise HyperError(f"shape a must exceed q - 1 = {self.q - 1}, got {self.a}")

    @property
    def q(self) -> int:
        return int(np.asarray(self.U).shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, DagWishartHyper):
            return NotImplemented
        return self.a == other.a and np.array_equal(self.U, other.U)


def identity_hyper(q: int, a: float | None = None, scale: float = 1.0) -> DagWishartHyper:
    """Convenience constructor: shape a (default q) and U = scale * I."""
    return DagWishartHyper(float(q) if a is None else float(a), scale * np.eye(q))


def resolve_hyper(q: int, a: float | None = None, U=None) -> DagWishartHyper:
    """Resolve user-facing hyperparameter shorthand.

    ``a`` defaults to q; ``U`` defaults to the identity, and a scalar value c
    means c times the identity.
    """
    a = float(q) if a is None else float(a)
    if U is None:
        U = np.eye(q)
    elif np.isscalar(U):
        U = float(U) * np.eye(q)
    return DagWishartHyper(a, U)


def node_shapes(dag: Dag, a: float) -> np.ndarray:
    """Per-node shapes a_j = a + |pa(j)| - q + 1 under the compatibility rule."""
    q = dag.q
    if not a > q - 1:
        raise HyperError(f"shape a must exceed q - 1 = {q - 1}, got {a}")
    npa = dag.adj.sum(axis=0).astype(np.float64)
    return a + npa - q + 1.0


def posterior_hyper(hyper: DagWishartHyper, tXX, n: int) -> DagWishartHyper:
    """Conjugate update (a, U) -> (a + n, U + X'X)."""
    t = np.asarray(tXX, dtype=np.float64)
    if t.shape != (hyper.q, hyper.q):
        raise ShapeError(f"gram matrix must be {hyper.q}x{hyper.q}, got {t.shape}")
    if n < 0:
        raise DomainError("sample size must be nonnegative")
    return DagWishartHyper(hyper.a + n, hyper.U + t)


@dataclass(frozen=True, eq=False)
class CholParams:
    """Modified-Cholesky parameter pair (D, L) of one precision matrix.

    L is unit-diagonal with off-diagonal support on the edges of the
    associated DAG (entry [u-1, v-1] belongs to edge u -> v); D is diagonal
    with positive conditional variances.
    """

    L: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.L, dtype=np.float64)
        D = np.asarray(self.D, dtype=np.float64)
        if L.ndim != 2 or L.shape[0] != L.shape[1] or L.shape != D.shape:
            raise ShapeError("L and D must be square matrices of equal shape")
        if not np.allclose(np.diag(L), 1.0, rtol=0.0, atol=0.0):
            raise ShapeError("L must have unit diagonal")
        dvec = np.diag(D).copy()
        if np.any(D - np.diag(dvec)):
            raise ShapeError("D must be diagonal")
        if not np.all(dvec > 0.0):
            raise DomainError("conditional variances must be positive")
        for arr in (L, D):
            arr.setflags(write=False)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "D", D)

    @classmethod
    def from_vectors(cls, L: np.ndarray, dvec: np.ndarray) -> "CholParams":
        return cls(L, np.diag(np.asarray(dvec, dtype=np.float64)))

    @property
    def q(self) -> int:
        return self.L.shape[0]

    @property
    def dvec(self) -> np.ndarray:
        return np.diag(self.D).copy()

    def supported_by(self, dag: Dag) -> bool:
        """True iff every nonzero off-diagonal of L sits on an edge of dag."""
        off = self.L.copy()
        np.fill_diagonal(off, 0.0)
        return bool(np.all((off != 0.0) <= (dag.adj > 0)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, CholParams):
            return NotImplemented
        return np.array_equal(self.L, other.L) and np.array_equal(self.D, other.D)


def omega_from_chol(params: CholParams) -> np.ndarray:
    """Precision matrix Omega = L D^-1 L', exactly symmetrized."""
    d = params.dvec
    om = (params.L / d[np.newaxis, :]) @ params.L.T
    return (om + om.T) / 2.0


def _pa_indices(adj: np.ndarray, j0: int) -> tuple[int, ...]:
    return tuple(int(u) for u in np.flatnonzero(adj[:, j0]))


class _NodeFactors:
    """Per-(node, parent-set) Cholesky machinery for one rate matrix U.

    Caches, keyed by (j, pa): the half shape a_j/2, the half rate
    U_{jj|pa}/2, the conditional mean -U_{pa,pa}^-1 U_{pa,j}, the factor
    A = C^-T (so A A' = U_{pa,pa}^-1) and the log-determinant of U_{pa,pa}.
    """

    __slots__ = ("a", "U", "q", "_cache")

    def __init__(self, a: float, U: np.ndarray):
        self.a = a
        self.U = U
        self.q = U.shape[0]
        self._cache: dict = {}

    def get(self, j0: int, pa: tuple[int, ...]):
        key = (j0, pa)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        shape_half = 0.5 * (self.a + len(pa) - self.q + 1)
        if pa:
            sel = np.asarray(pa, dtype=np.intp)
            upa = self.U[np.ix_(sel, sel)]
            upj = self.U[sel, j0]
            c = cholesky_lower(upa)
            y = solve_triangular(c, upj, lower=True, check_finite=False)
            schur = float(self.U[j0, j0] - y @ y)
            mean = -solve_triangular(c.T, y, lower=False, check_finite=False)
            a_factor = solve_triangular(
                c, np.eye(len(pa)), lower=True, check_finite=False
            ).T
            logdet = 2.0 * float(np.sum(np.log(np.diag(c))))
        else:
            schur = float(self.U[j0, j0])
            mean = np.empty(0)
            a_factor = np.empty((0, 0))
            logdet = 0.0
        if schur <= 0.0:
            raise NotSpdError(
                f"conditional variance block for node {j0 + 1} is not positive"
            )
        out = (shape_half, 0.5 * schur, mean, a_factor, logdet)
        self._cache[key] = out
        return out


class DagWishartSampler:
    """Direct sampler for (D, L) given a DAG, with hyperparameters fixed.

    Use prior hyperparameters for prior draws, or the output of
    posterior_hyper for posterior draws; the draw path is identical.
    Factor computations are cached per (node, parent set), which is what
    makes repeated draws along an MCMC trajectory cheap.
    """

    def __init__(self, hyper: DagWishartHyper):
        self.hyper = hyper
        self._factors = _NodeFactors(hyper.a, hyper.U)

    def draw(self, dag: Dag, rng: np.random.Generator) -> CholParams:
        q = dag.q
        if q != self.hyper.q:
            raise ShapeError("graph and hyperparameter dimensions disagree")
        adj = dag.adj
        L = np.eye(q)
        dvec = np.empty(q)
        for j0 in range(q):
            pa = _pa_indices(adj, j0)
            shape_half, rate_half, mean, a_factor, _ = self._factors.get(j0, pa)
            d = rate_half / rng.gamma(shape_half, 1.0)
            dvec[j0] = d
            if pa:
                z = rng.standard_normal(len(pa))
                L[np.asarray(pa, dtype=np.intp), j0] = mean + np.sqrt(d) * (a_factor @ z)
        return CholParams.from_vectors(L, dvec)


def sample_prior(
    dag: Dag, hyper: DagWishartHyper, rng: np.random.Generator, n: int = 1
) -> list[CholParams]:
    """n independent draws of (D, L) from the prior (or posterior) law.

    Node j draws D_jj from Inverse-Gamma(a_j/2, U_{jj|pa}/2) and then its
    parent coefficients from the conditional Gaussian; nodes are independent.
    Posterior sampling is the same call with posterior_hyper output.
    """
    if n < 1:
        raise DomainError("number of draws must be at least 1")
    sampler = DagWishartSampler(hyper)
    return [sampler.draw(dag, rng) for _ in range(n)]


def _node_lml(
    j0: int,
    pa: tuple[int, ...],
    prior: _NodeFactors,
    post: _NodeFactors,
    n: int,
) -> float:
    """Closed-form log marginal likelihood of node j given its parent block."""
    a_half, prior_rate, _, _, prior_logdet = prior.get(j0, pa)
    at_half, post_rate, _, _, post_logdet = post.get(j0, pa)
    return (
        -0.5 * n * _LOG_2PI
        + 0.5 * (prior_logdet - post_logdet)
        + gammaln(at_half)
        - gammaln(a_half)
        + a_half * np.log(prior_rate)
        - at_half * np.log(post_rate)
    )


class NodeMarginalCache:
    """Memoized node marginal likelihoods for one dataset.

    Builds U + X'X once and caches each (node, parent set) value; an MCMC
    run revisits identical parent sets constantly. One instance per chain
    (or guard externally): concurrent use must not share instances.
    """

    def __init__(self, tXX, n: int, hyper: DagWishartHyper):
        t = np.asarray(tXX, dtype=np.float64)
        if t.shape != (hyper.q, hyper.q):
            raise ShapeError(f"gram matrix must be {hyper.q}x{hyper.q}, got {t.shape}")
        if n < 0:
            raise DomainError("sample size must be nonnegative")
        self.n = int(n)
        self.hyper = hyper
        self._prior = _NodeFactors(hyper.a, hyper.U)
        ut = hyper.U + (t + t.T) / 2.0
        self._post = _NodeFactors(hyper.a + n, ut)
        self._values: dict = {}

    def node_lml(self, j0: int, pa: tuple[int, ...]) -> float:
        key = (j0, pa)
        hit = self._values.get(key)
        if hit is None:
            hit = _node_lml(j0, pa, self._prior, self._post, self.n)
            self._values[key] = hit
        return hit


def node_log_marginal(j: int, dag: Dag, tXX, n: int, hyper: DagWishartHyper) -> float:
    """Log marginal likelihood of node j's data column given its parents.

    ``j`` is a 1-based node label. The value depends on the DAG only through
    pa(j). With n = 0 (and zero gram matrix) the result is exactly 0.
    """
    if not 1 <= j <= dag.q:
        raise IndexError(f"node label {j} outside 1..{dag.q}")
    cache = NodeMarginalCache(tXX, n, hyper)
    return float(cache.node_lml(j - 1, _pa_indices(dag.adj, j - 1)))


def dag_log_marginal(dag: Dag, tXX, n: int, hyper: DagWishartHyper) -> float:
    """Log marginal likelihood of the whole DAG: sum of the node terms."""
    cache = NodeMarginalCache(tXX, n, hyper)
    adj = dag.adj
    return float(
        sum(cache.node_lml(j0, _pa_indices(adj, j0)) for j0 in range(dag.q))
    )
