"""Bayesian structure learning and causal effects for Gaussian DAG models.

Samples from the joint posterior of DAG structures and Cholesky-parameterized
precision matrices via Metropolis-Hastings over graph space, and derives
causal effects of single and joint hard interventions with full posterior
uncertainty. Node labels are 1-based throughout the public API.
"""

__version__ = "0.1.0"

from .causal import (
    CausalDraws,
    CausalQuery,
    bma_causal_effect,
    causal_effect,
    intervention_L,
    posterior_causal_effects,
)
from .dagwishart import (
    CholParams,
    DagWishartHyper,
    dag_log_marginal,
    identity_hyper,
    node_log_marginal,
    node_shapes,
    omega_from_chol,
    posterior_hyper,
    resolve_hyper,
    sample_prior,
)
from .dagprior import log_prior, log_prior_ratio
from .errors import (
    CollapsedChainError,
    ConfigError,
    CorruptEncodingError,
    CycleError,
    DegenerateError,
    DomainError,
    EmptyChainError,
    GaussDagError,
    HyperError,
    NoMoveError,
    NotApplicableError,
    NotSpdError,
    QueryError,
    ShapeError,
    TooLargeError,
)
from .estimator import DagLearner
from .graph import (
    Dag,
    Operator,
    OpKind,
    apply_operator,
    count_valid_operators,
    enumerate_all_dags,
    enumerate_possible_operators,
    is_acyclic,
    markov_equivalent,
    propose_exact,
    propose_fast,
    valid_operators,
)
from .mcmc import (
    Chain,
    McmcConfig,
    acceptance_log_ratio,
    decode_compact,
    encode_compact,
    learn_dag,
    load_chain,
    run_collapsed,
    run_pas,
    save_chain,
)
from .oracle import (
    ExactPosterior,
    exact_posterior,
    mc_marginal_likelihood,
    path_coefficient_effect,
)
from .simulate import Dataset, SemSpec, rand_dag, rand_sem_params, sample_data
from .summaries import (
    DiagnosticsReport,
    diagnostics,
    edge_probabilities,
    map_dag,
    mpm_dag,
    structural_hamming_distance,
)

__all__ = [
    "__version__",
    # graphs and moves
    "Dag",
    "Operator",
    "OpKind",
    "is_acyclic",
    "apply_operator",
    "enumerate_possible_operators",
    "valid_operators",
    "count_valid_operators",
    "propose_exact",
    "propose_fast",
    "enumerate_all_dags",
    "markov_equivalent",
    # prior / posterior
    "DagWishartHyper",
    "CholParams",
    "identity_hyper",
    "resolve_hyper",
    "node_shapes",
    "posterior_hyper",
    "sample_prior",
    "node_log_marginal",
    "dag_log_marginal",
    "omega_from_chol",
    "log_prior",
    "log_prior_ratio",
    # sampling
    "McmcConfig",
    "Chain",
    "run_pas",
    "run_collapsed",
    "learn_dag",
    "acceptance_log_ratio",
    "encode_compact",
    "decode_compact",
    "save_chain",
    "load_chain",
    # causal effects
    "CausalQuery",
    "CausalDraws",
    "intervention_L",
    "causal_effect",
    "posterior_causal_effects",
    "bma_causal_effect",
    # summaries
    "edge_probabilities",
    "map_dag",
    "mpm_dag",
    "diagnostics",
    "DiagnosticsReport",
    "structural_hamming_distance",
    # simulation
    "Dataset",
    "SemSpec",
    "rand_dag",
    "rand_sem_params",
    "sample_data",
    # oracles
    "ExactPosterior",
    "exact_posterior",
    "mc_marginal_likelihood",
    "path_coefficient_effect",
    # estimator
    "DagLearner",
    # errors
    "GaussDagError",
    "ShapeError",
    "CycleError",
    "NotApplicableError",
    "NoMoveError",
    "TooLargeError",
    "NotSpdError",
    "DomainError",
    "HyperError",
    "DegenerateError",
    "ConfigError",
    "QueryError",
    "CollapsedChainError",
    "EmptyChainError",
    "CorruptEncodingError",
]
