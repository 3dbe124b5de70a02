"""Scikit-learn style front end for Bayesian DAG structure learning.

DagLearner wraps the samplers behind the familiar fit/get_params surface so
the learner drops into pipelines, cloning and grid search alongside other
estimators. Fitting runs the MCMC; fitted attributes expose the chain and
its standard summaries, and causal effects are queried post-fit.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .causal import CausalQuery, bma_causal_effect, posterior_causal_effects
from .dagwishart import resolve_hyper
from .mcmc import McmcConfig, _run
from .simulate import Dataset
from .summaries import diagnostics, edge_probabilities, map_dag, mpm_dag


class DagLearner(BaseEstimator):
    """Posterior sampler for Gaussian DAG models with a fit/predict-style API.

    Parameters
    ----------
    S : int
        Number of retained MCMC draws.
    burn : int
        Burn-in iterations, discarded.
    a : float or None
        Common prior shape; defaults to the number of columns q (must
        exceed q - 1).
    U : None, float or array
        Prior rate matrix; None means the identity, a scalar c means c * I.
    w : float
        Prior edge-inclusion probability, strictly between 0 and 1.
    fast : bool
        Use the rejection proposal (skips valid-move enumeration).
    collapse : bool
        Sample graphs only, integrating parameters out analytically.
    save_memory : bool
        Store parameter draws sparsely.
    seed : int or None
        RNG seed; None draws one from system entropy (recorded in seed_).

    Attributes
    ----------
    chain_ : Chain
        The retained posterior sample.
    edge_probabilities_ : ndarray of shape (q, q)
        Posterior edge-inclusion frequencies.
    map_dag_ : Dag
        Most frequently visited graph.
    mpm_ : ndarray of shape (q, q)
        Median-probability model (0/1 matrix; may contain cycles).
    acceptance_rate_ : float
        Accepted proposals over all burn + S iterations.
    seed_ : int
        The seed actually used.
    """

    def __init__(
        self,
        S: int = 5000,
        burn: int = 1000,
        a: float | None = None,
        U=None,
        w: float = 0.1,
        fast: bool = False,
        collapse: bool = False,
        save_memory: bool = False,
        seed: int | None = None,
    ):
        self.S = S
        self.burn = burn
        self.a = a
        self.U = U
        self.w = w
        self.fast = fast
        self.collapse = collapse
        self.save_memory = save_memory
        self.seed = seed

    def fit(self, X, y=None):
        """Run the sampler on an (n, q) data matrix of zero-mean observations."""
        X = check_array(X, dtype=np.float64, ensure_min_samples=1, ensure_min_features=1)
        data = Dataset.from_array(X)
        hyper = resolve_hyper(data.q, self.a, self.U)
        seed = self.seed
        if seed is None:
            seed = int(np.random.SeedSequence().entropy % (1 << 63))
        config = McmcConfig(
            S=self.S,
            burn=self.burn,
            w=self.w,
            fast=self.fast,
            collapse=self.collapse,
            save_memory=self.save_memory,
            seed=int(seed),
        )
        self.chain_ = _run(config, data, hyper)
        self.n_features_in_ = data.q
        self.seed_ = int(seed)
        self.acceptance_rate_ = self.chain_.acceptance_rate
        if self.S > 0:
            self.edge_probabilities_ = edge_probabilities(self.chain_)
            self.map_dag_ = map_dag(self.chain_)
            self.mpm_ = mpm_dag(self.chain_)
        return self

    def causal_effect(self, targets, response: int, bma: bool = False):
        """Posterior causal-effect draws (or their model-averaged means).

        ``targets`` and ``response`` are 1-based node labels. With
        ``bma=False`` returns CausalDraws (one row per retained state); with
        ``bma=True`` returns the vector of column means.
        """
        check_is_fitted(self, "chain_")
        query = CausalQuery(tuple(int(t) for t in targets), int(response))
        draws = posterior_causal_effects(self.chain_, query)
        return bma_causal_effect(draws) if bma else draws

    def diagnostics(self):
        """Convergence series (edge-count trace and running frequencies)."""
        check_is_fitted(self, "chain_")
        return diagnostics(self.chain_)
