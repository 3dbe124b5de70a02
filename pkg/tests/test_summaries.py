import numpy as np
import pytest

from gaussdag import (
    Dag,
    Dataset,
    EmptyChainError,
    McmcConfig,
    diagnostics,
    edge_probabilities,
    exact_posterior,
    identity_hyper,
    map_dag,
    mpm_dag,
    rand_dag,
    rand_sem_params,
    run_collapsed,
    run_pas,
    sample_data,
    structural_hamming_distance,
)
from gaussdag.mcmc import Chain


def make_chain(dags, q):
    """Hand-built collapsed chain visiting the given states in order."""
    bits = np.stack([np.packbits(d.adj.ravel()) for d in dags])
    S = len(dags)
    return Chain(
        q,
        McmcConfig(S=S, seed=0, collapse=True),
        bits,
        np.full(S, 255, dtype=np.uint8),
        np.zeros(S, dtype=bool),
        0,
    )


@pytest.fixture(scope="module")
def long_chain_and_posterior():
    rng = np.random.default_rng(8)
    dag = rand_dag(3, 0.4, rng)
    params = rand_sem_params(dag, 0.3, 0.9, np.ones(3), rng)
    data = sample_data(100, params, rng)
    h = identity_hyper(3)
    chain = run_collapsed(
        McmcConfig(S=30_000, burn=3_000, w=0.2, seed=15, collapse=True), data, h
    )
    return chain, exact_posterior(data, h, 0.2)


class TestEdgeProbabilities:
    def test_single_state(self):
        d = Dag.from_edges(3, [(1, 2), (3, 2)])
        probs = edge_probabilities(make_chain([d], 3))
        np.testing.assert_array_equal(probs, d.adj.astype(float))

    def test_alternating_states(self):
        d1, d2 = Dag.from_edges(2, [(1, 2)]), Dag.empty(2)
        probs = edge_probabilities(make_chain([d1, d2, d1, d2], 2))
        assert probs[0, 1] == 0.5 and probs[1, 0] == 0.0

    def test_matches_exact_marginals(self, long_chain_and_posterior):
        chain, post = long_chain_and_posterior
        assert np.abs(edge_probabilities(chain) - post.edge_marginals()).max() < 0.03

    def test_empty_chain_rejected(self):
        rng = np.random.default_rng(0)
        data = Dataset.from_array(rng.standard_normal((10, 2)))
        empty = run_pas(McmcConfig(S=0, seed=0), data, identity_hyper(2))
        with pytest.raises(EmptyChainError):
            edge_probabilities(empty)


class TestMapDag:
    def test_single_state(self):
        d = Dag.from_edges(2, [(2, 1)])
        assert map_dag(make_chain([d, d, d], 2)) == d

    def test_majority_wins(self):
        d1, d2 = Dag.from_edges(2, [(1, 2)]), Dag.empty(2)
        assert map_dag(make_chain([d1, d1, d1, d2, d2], 2)) == d1

    def test_tie_breaks_on_smallest_bitstring(self):
        d1, d2 = Dag.from_edges(2, [(1, 2)]), Dag.from_edges(2, [(2, 1)])
        winner = min(
            (np.packbits(d.adj.ravel()).tobytes(), d) for d in (d1, d2)
        )[1]
        assert map_dag(make_chain([d1, d2], 2)) == winner
        assert map_dag(make_chain([d2, d1], 2)) == winner

    def test_map_frequency_dominates(self, long_chain_and_posterior):
        chain, _ = long_chain_and_posterior
        best = map_dag(chain)
        key = np.packbits(best.adj.ravel()).tobytes()
        counts = {}
        for s in range(len(chain)):
            k = chain._dag_bits[s].tobytes()
            counts[k] = counts.get(k, 0) + 1
        assert counts[key] == max(counts.values())

    def test_matches_exact_argmax_on_separated_instance(self, long_chain_and_posterior):
        chain, post = long_chain_and_posterior
        exact_best = post.dags[int(np.argmax(post.probs))]
        assert map_dag(chain) == exact_best


class TestMpm:
    def test_exactly_half_excluded(self):
        d1, d2 = Dag.from_edges(2, [(1, 2)]), Dag.empty(2)
        mpm = mpm_dag(make_chain([d1, d2], 2))
        assert mpm[0, 1] == 0  # probability exactly 0.5 is excluded

    def test_single_state_recovers_adjacency(self):
        d = Dag.from_edges(3, [(1, 3), (2, 3)])
        np.testing.assert_array_equal(mpm_dag(make_chain([d], 3)), d.adj)

    def test_rederivable_from_edge_probabilities(self, long_chain_and_posterior):
        chain, _ = long_chain_and_posterior
        np.testing.assert_array_equal(
            mpm_dag(chain), (edge_probabilities(chain) > 0.5).astype(np.uint8)
        )

    def test_equals_map_on_well_separated_instance(self):
        # a strong collider is alone in its equivalence class, so the
        # posterior concentrates on a single graph and the edgewise and
        # most-visited summaries coincide (instance-dependent in general)
        from gaussdag import CholParams, exact_posterior, learn_dag

        rng = np.random.default_rng(2)
        truth = Dag.from_edges(3, [(1, 3), (2, 3)])
        L = np.eye(3)
        L[0, 2], L[1, 2] = -0.9, 0.8
        data = sample_data(300, CholParams.from_vectors(L, np.ones(3)), rng)
        assert exact_posterior(data, identity_hyper(3), 0.1).prob_of(truth) > 0.9
        chain = learn_dag(data, S=5000, burn=1000, w=0.1, seed=3)
        assert np.array_equal(mpm_dag(chain), map_dag(chain).adj)
        assert np.array_equal(mpm_dag(chain), truth.adj)


class TestDiagnostics:
    def test_constant_chain(self):
        d = Dag.from_edges(2, [(1, 2)])
        rep = diagnostics(make_chain([d] * 6, 2))
        assert np.all(rep.size_trace == 1)
        assert np.all(rep.running_mean_size == 1.0)

    def test_final_running_row_equals_edge_probabilities(self, long_chain_and_posterior):
        chain, _ = long_chain_and_posterior
        rep = diagnostics(chain)
        probs = edge_probabilities(chain)
        for v in range(1, chain.q + 1):
            np.testing.assert_allclose(
                rep.running_edge_probs(v)[-1], probs[:, v - 1], atol=1e-12
            )

    def test_prefix_property(self, long_chain_and_posterior):
        chain, _ = long_chain_and_posterior
        rep = diagnostics(chain)
        for s in (0, 1, 999, len(chain) - 1):
            assert rep.running_mean_size[s] == pytest.approx(
                rep.size_trace[: s + 1].mean(), abs=1e-12
            )

    def test_csv_bundle(self, tmp_path):
        d1, d2 = Dag.from_edges(2, [(1, 2)]), Dag.empty(2)
        rep = diagnostics(make_chain([d1, d2, d2], 2))
        files = rep.write_csv(tmp_path)
        assert (tmp_path / "sizetrace.csv").exists()
        assert (tmp_path / "edgeprobs_running_v1.csv").exists()
        assert len(files) == 3
        rows = (tmp_path / "sizetrace.csv").read_text().splitlines()
        assert rows[0] == "s,size,running_mean"
        assert rows[1].startswith("1,1,")


class TestHammingDistance:
    def test_identical(self):
        d = Dag.from_edges(3, [(1, 2)])
        assert structural_hamming_distance(d.adj, d.adj) == 0

    def test_flip_counts_once(self):
        a = Dag.from_edges(2, [(1, 2)]).adj
        b = Dag.from_edges(2, [(2, 1)]).adj
        assert structural_hamming_distance(a, b) == 1

    def test_insertion_and_deletion(self):
        a = Dag.from_edges(3, [(1, 2)]).adj
        b = Dag.from_edges(3, [(1, 2), (2, 3)]).adj
        assert structural_hamming_distance(a, b) == 1
        assert structural_hamming_distance(a, np.zeros((3, 3), dtype=int)) == 1
