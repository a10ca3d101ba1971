import numpy as np
import pytest

from orderlab.graphs import Dag, ParameterError, gen_er, reachability
from orderlab.oracle import (
    DEFAULT_DELTA,
    DEFAULT_EPSILON,
    InterventionVector,
    build_oracle,
    default_score_const,
    sample_interventions,
)


def chain3() -> Dag:
    return Dag(d=3, arrival=np.arange(3), edges=np.array([(0, 1), (1, 2)]))


def iv_of(bits) -> InterventionVector:
    bits = np.asarray(bits, dtype=np.uint8)
    return InterventionVector(bits=bits, p_int=float(bits.mean()))


class TestSampling:
    def test_p_zero_all_zeros(self):
        assert sample_interventions(5, 0.0, seed=1).bits.sum() == 0

    def test_p_one_all_ones(self):
        assert sample_interventions(5, 1.0, seed=1).bits.sum() == 5

    def test_binomial_concentration(self):
        # Per-draw mean of 1000 bits should sit inside the 4-sigma binomial band
        # in all but a vanishing fraction of draws.
        d, p = 1000, 0.25
        band = 4 * np.sqrt(p * (1 - p) / d)
        means = np.array([sample_interventions(d, p, seed=s).bits.mean() for s in range(10_000)])
        assert np.mean(np.abs(means - p) > band) <= 5e-4
        assert abs(means.mean() - p) < 4 * np.sqrt(p * (1 - p) / (d * 10_000))

    def test_invalid_probability(self):
        with pytest.raises(ParameterError):
            sample_interventions(5, 1.5, seed=0)

    def test_deterministic(self):
        a = sample_interventions(50, 0.5, seed=3)
        b = sample_interventions(50, 0.5, seed=3)
        assert np.array_equal(a.bits, b.bits)


class TestBuildOracle:
    def test_chain_ancestral(self):
        oracle = build_oracle(chain3(), iv_of([1, 0, 0]), mode="ancestral")
        hi = DEFAULT_EPSILON + DEFAULT_DELTA
        assert oracle.matrix[0, 1] == hi and oracle.matrix[0, 2] == hi
        assert oracle.matrix[1, 2] == 0.0 and oracle.matrix[2, 1] == 0.0

    def test_chain_restricted(self):
        oracle = build_oracle(chain3(), iv_of([1, 0, 0]), mode="restricted")
        assert oracle.matrix[0, 1] == DEFAULT_EPSILON + DEFAULT_DELTA
        assert oracle.matrix[0, 2] == 0.0

    @pytest.mark.parametrize("mode", ["ancestral", "restricted"])
    def test_supra_support_matches_graph_predicate(self, mode):
        for s in range(20):
            dag = gen_er(8, 0.4, seed=s)
            iv = sample_interventions(8, 0.5, seed=100 + s)
            oracle = build_oracle(dag, iv, mode=mode)
            predicate = reachability(dag) if mode == "ancestral" else dag.adjacency
            expected = predicate & iv.bits.astype(bool)[:, None]
            np.fill_diagonal(expected, False)
            assert np.array_equal(oracle.supra(), expected)

    def test_noise_preserves_biconditional(self):
        dag = gen_er(10, 0.4, seed=2)
        iv = sample_interventions(10, 0.6, seed=3)
        eps, delta, eta = 0.1, 0.4, 0.5
        oracle = build_oracle(dag, iv, epsilon=eps, delta=delta, mode="ancestral", eta=eta, seed=9)
        reach = reachability(dag)
        for i in iv.targets():
            for j in range(10):
                if j == int(i):
                    continue
                v = oracle.matrix[i, j]
                if reach[i, j]:
                    assert eps + delta * (1 - eta) <= v <= eps + delta * (1 + eta)
                    assert v > eps
                else:
                    assert 0.0 <= v <= eps * (1 - eta)

    def test_parameter_errors(self):
        dag, iv = chain3(), iv_of([1, 0, 0])
        with pytest.raises(ParameterError):
            build_oracle(dag, iv, epsilon=0.0)
        with pytest.raises(ParameterError):
            build_oracle(dag, iv, delta=-1.0)
        with pytest.raises(ParameterError):
            build_oracle(dag, iv, mode="nonsense")
        with pytest.raises(ParameterError):
            build_oracle(dag, iv, eta=1.0)

    def test_dump_csv(self, tmp_path):
        oracle = build_oracle(chain3(), iv_of([1, 0, 0]))
        path = tmp_path / "oracle.csv"
        oracle.dump_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# epsilon=0.1")
        assert "mode=ancestral" in lines[0]
        assert lines[1] == "i,j,d_ij"
        assert len(lines) == 2 + 2  # entries only for the single intervened node

    def test_default_score_const_exceeds_epsilon(self):
        assert default_score_const() > DEFAULT_EPSILON
        assert default_score_const() == pytest.approx(0.6)
