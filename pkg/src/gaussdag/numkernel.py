"""Small dense linear algebra and elementary random sampling.

Internal kernel shared by the statistical modules. All indices taken by
functions in this module are 0-based array positions. Every determinant is
handled in log space; callers never see raw determinants.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, NotSpdError, ShapeError

# Relative asymmetry tolerated before a matrix is rejected outright; anything
# below is silently symmetrized, since sums like U + X'X accumulate roundoff.
SYM_RTOL = 1e-12


def as_spd(m, name: str = "matrix") -> np.ndarray:
    """Validate and normalize a symmetric positive definite matrix.

    Returns a float64 copy, exactly symmetrized. Raises ShapeError for
    non-square or materially asymmetric input, NotSpdError if the Cholesky
    factorization fails.
    """
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {a.shape}")
    if a.size == 0:
        return a.copy()
    if not np.all(np.isfinite(a)):
        raise ShapeError(f"{name} contains non-finite entries")
    scale = max(1.0, float(np.abs(a).max()))
    if float(np.abs(a - a.T).max()) > SYM_RTOL * scale:
        raise ShapeError(f"{name} is not symmetric")
    a = (a + a.T) / 2.0
    cholesky_lower(a)  # raises NotSpdError with the offending pivot
    return a


def _diagnose_pivot(m: np.ndarray) -> int:
    """Locate the first nonpositive pivot of a failed Cholesky factorization."""
    n = m.shape[0]
    c = np.zeros_like(m)
    for j in range(n):
        s = m[j, j] - np.dot(c[j, :j], c[j, :j])
        if s <= 0.0 or not np.isfinite(s):
            return j
        c[j, j] = np.sqrt(s)
        if j + 1 < n:
            c[j + 1 :, j] = (m[j + 1 :, j] - c[j + 1 :, :j] @ c[j, :j]) / c[j, j]
    return n - 1


def cholesky_lower(m) -> np.ndarray:
    """Lower Cholesky factor C with C @ C.T == m.

    The 0x0 matrix factors to itself. Raises NotSpdError carrying the index
    of the first nonpositive pivot.
    """
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected square matrix, got shape {a.shape}")
    if a.size == 0:
        return a.copy()
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        pivot = _diagnose_pivot(a)
        raise NotSpdError(
            f"matrix is not positive definite (pivot {pivot} nonpositive)",
            pivot=pivot,
        ) from None


def logdet_spd(m) -> float:
    """Log-determinant of an s.p.d. matrix via its Cholesky factor.

    The empty (0x0) matrix has log-determinant 0 by convention (the
    no-parents case).
    """
    c = cholesky_lower(m)
    if c.size == 0:
        return 0.0
    return 2.0 * float(np.sum(np.log(np.diag(c))))


def schur_scalar(m, j: int, idx) -> float:
    """Conditional-variance Schur complement m[j,j] - m[j,A] m[A,A]^-1 m[A,j].

    ``j`` is a 0-based index, ``idx`` a sequence of 0-based indices not
    containing j. Empty ``idx`` returns m[j,j].
    """
    a = np.asarray(m, dtype=np.float64)
    sel = np.asarray(sorted(idx), dtype=np.intp)
    if sel.size == 0:
        return float(a[j, j])
    if j in sel:
        raise ShapeError("conditioning set must not contain the target index")
    sub = a[np.ix_(sel, sel)]
    c = cholesky_lower(sub)
    y = np.linalg.solve(c, a[sel, j])
    return float(a[j, j] - y @ y)


def gram(x) -> np.ndarray:
    """Gram matrix X'X of an (n, q) data matrix, exactly symmetric."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"expected 2-D data matrix, got shape {a.shape}")
    g = a.T @ a
    return (g + g.T) / 2.0


def sample_mvn(mean, cov, rng: np.random.Generator) -> np.ndarray:
    """One multivariate normal draw as mean + C z with C the Cholesky factor.

    Dimension 0 is permitted and returns an empty vector (a node with no
    parents).
    """
    mu = np.asarray(mean, dtype=np.float64).ravel()
    if mu.size == 0:
        return mu.copy()
    c = cholesky_lower(cov)
    if c.shape[0] != mu.size:
        raise ShapeError("mean and covariance dimensions disagree")
    return mu + c @ rng.standard_normal(mu.size)


def sample_inverse_gamma(shape: float, rate: float, rng: np.random.Generator) -> float:
    """One inverse-gamma draw, (shape, rate) parameterized.

    Density is proportional to x^(-shape-1) exp(-rate/x); the mean is
    rate / (shape - 1) for shape > 1.
    """
    if not (shape > 0.0 and rate > 0.0):
        raise DomainError("shape and rate must be positive")
    return rate / rng.gamma(shape, 1.0)


def rng_from_seed(seed: int) -> np.random.Generator:
    """Deterministic PCG64 generator: same seed, same draw sequence."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """n independent generators derived from one seed (stream split)."""
    children = np.random.SeedSequence(int(seed)).spawn(n)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def derive_seeds(seed: int, n: int) -> list[int]:
    """n reproducible 64-bit integer seeds derived from one master seed."""
    state = np.random.SeedSequence(int(seed)).generate_state(n, np.uint64)
    return [int(s) for s in state]
