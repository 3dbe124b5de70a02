"""Shared fixtures and the acceptance-suite pass/fail summary."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

# One human-readable line per acceptance criterion, keyed by test name.
ACCEPTANCE_LABELS = {
    "test_01_worked_causal_effect": "worked causal-effect example",
    "test_02_marginal_likelihood_vs_mc_oracle": "closed-form marginal vs Monte Carlo oracle",
    "test_03_score_equivalence": "score equivalence across equivalent DAGs",
    "test_04_exact_posterior_recovery": "MCMC recovers the enumerated posterior (4 configs)",
    "test_05_effect_matches_path_rule": "causal effects match the path rule",
    "test_06_post_intervention_simulation": "post-intervention simulation reproduces effects",
    "test_07_proposal_ratio_concentrates": "proposal-ratio approximation improves with q",
    "test_08_edge_recovery_benchmark": "synthetic benchmark edge recovery (10 seeds)",
    "test_09_seeded_reproducibility": "byte-identical reruns under a fixed seed",
    "test_10_capacity_and_diagnostics": "large-run capacity and diagnostics consistency",
}

_acceptance_outcomes: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid or report.when != "call":
        return
    name = report.nodeid.split("::")[-1].split("[")[0]
    if name in ACCEPTANCE_LABELS:
        outcome = "PASS" if report.passed else "FAIL"
        prev = _acceptance_outcomes.get(name)
        if prev != "FAIL":
            _acceptance_outcomes[name] = outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, label in ACCEPTANCE_LABELS.items():
        outcome = _acceptance_outcomes.get(name, "NOT RUN")
        terminalreporter.write_line(f"[{outcome}] {label}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
