import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bitextkit import kernels
from bitextkit.sampling import (InfeasibleError, MarginalTarget, NotConvergedError, PairMassMatrix,
                                PairSampler, SinkhornResult, default_target, dictionary_coverage,
                                empirical_tv, pair_matrix_from_catalog, pair_matrix_from_counts,
                                read_matrix, sample_pair, sinkhorn_balance, temperature_rescale, write_matrix)
from oracles import chi2_critical_99, expected_tv, ipf, power_rescale

LANGS4 = ("a", "b", "c", "d")


def uniform_q(L):
    q = np.ones((L, L)) - np.eye(L)
    return PairMassMatrix(q / q.sum(), tuple(f"x{i}" for i in range(L)))


def random_feasible(rng, L, zero_frac=0.3):
    """Symmetric Q with a Hamiltonian cycle kept so every row has support."""
    Q = rng.random((L, L))
    Q = np.triu(Q, 1)
    Q[np.triu(rng.random((L, L)) < zero_frac, 1)] = 0.0
    for i in range(L):
        j = (i + 1) % L
        a, b = min(i, j), max(i, j)
        if Q[a, b] == 0:
            Q[a, b] = rng.random() + 0.1
    Q = Q + Q.T
    return PairMassMatrix(Q / Q.sum(), tuple(f"x{i}" for i in range(L)))


class TestTemperature:
    @pytest.mark.parametrize("T", [0.5, 1, 5, 100])
    def test_uniform_fixed_point(self, T):
        np.testing.assert_allclose(temperature_rescale([1, 1, 1, 1], T).probabilities, 0.25, atol=1e-15)

    def test_t1_raw_proportions(self):
        np.testing.assert_allclose(temperature_rescale([16, 1], 1).probabilities, [16 / 17, 1 / 17], atol=1e-15)

    def test_fourth_root(self):
        np.testing.assert_allclose(temperature_rescale([16, 1], 4).probabilities, [2 / 3, 1 / 3], atol=1e-15)

    def test_matches_oracle(self):
        counts = [3e9, 1e7, 12345, 0, 2]
        got = temperature_rescale(counts, 5).probabilities
        np.testing.assert_allclose(got, power_rescale(counts, 5), rtol=1e-12, atol=1e-15)

    def test_zero_preserved(self):
        q = temperature_rescale([5, 0, 3], 5).probabilities
        assert q[1] == 0.0 and q.sum() == pytest.approx(1.0, abs=1e-12)

    def test_max_decreases_with_t(self):
        maxes = [temperature_rescale([100, 10, 1, 1], T).probabilities.max() for T in (1, 2, 5, 10, 50)]
        assert all(a > b for a, b in zip(maxes, maxes[1:]))

    @pytest.mark.parametrize("counts, T", [([0, 0], 5), ([1, 2], 0), ([1, 2], -1), ([1, -1], 5)])
    def test_errors(self, counts, T):
        with pytest.raises(ValueError):
            temperature_rescale(counts, T)

    def test_huge_counts_do_not_overflow(self):
        q = temperature_rescale([1e300, 1e250], 0.01).probabilities
        assert np.all(np.isfinite(q)) and q[0] == pytest.approx(1.0)


class TestSinkhorn:
    def test_three_by_three_oracle(self):
        Q = pair_matrix_from_counts({("l1", "l2"): 2, ("l1", "l3"): 1, ("l2", "l3"): 1}, ["l1", "l2", "l3"])
        target = temperature_rescale([3, 3, 2], 5)
        res = sinkhorn_balance(Q, target, tol=1e-9)
        p = list(target.probabilities)
        want = np.array(ipf(Q.entries.tolist(), p, p, tol=1e-12))
        assert res.converged
        np.testing.assert_allclose(res.matrix, want, atol=1e-8, rtol=0)

    def test_uniform_l4(self):
        Q = uniform_q(4)
        res = sinkhorn_balance(Q, temperature_rescale([1, 1, 1, 1]))
        expected = (np.ones((4, 4)) - np.eye(4)) / 12
        np.testing.assert_allclose(res.matrix, expected, atol=1e-12)
        assert np.all(np.diag(res.matrix) == 0)

    def test_zero_entry_stays_zero(self):
        Q = np.ones((4, 4)) - np.eye(4)
        Q[0, 2] = Q[2, 0] = 0
        # a and c only reach b and d, so their target mass must not exceed b's plus d's
        res = sinkhorn_balance(PairMassMatrix(Q / Q.sum(), LANGS4), temperature_rescale([1, 3, 2, 4]))
        assert res.converged
        assert res.matrix[0, 2] == 0.0 and res.matrix[2, 0] == 0.0

    def test_marginals_met(self):
        rng = np.random.default_rng(3)
        Q = random_feasible(rng, 40)
        t = default_target(Q)
        res = sinkhorn_balance(Q, t, tol=1e-10)
        np.testing.assert_allclose(res.matrix.sum(axis=1), t.probabilities, atol=1e-10)
        np.testing.assert_allclose(res.matrix.sum(axis=0), t.probabilities, atol=1e-10)
        assert res.matrix.sum() == pytest.approx(1.0, abs=1e-9)

    def test_empty_row_is_infeasible(self):
        Q = np.zeros((3, 3))
        Q[0, 1] = Q[1, 0] = 1
        with pytest.raises(InfeasibleError, match="c") as info:
            sinkhorn_balance(PairMassMatrix(Q / 2, ("a", "b", "c")), temperature_rescale([1, 1, 1]))
        assert info.value.languages == ("c",)

    def test_zero_target_allowed_for_empty_row(self):
        Q = np.zeros((3, 3))
        Q[0, 1] = Q[1, 0] = 1
        res = sinkhorn_balance(PairMassMatrix(Q / 2, ("a", "b", "c")), temperature_rescale([1, 1, 0]))
        assert res.converged

    def test_unconverged_is_flagged(self):
        # a star on 3 nodes cannot give every language one third of the mass
        Q = np.zeros((3, 3))
        Q[0, 1] = Q[1, 0] = Q[0, 2] = Q[2, 0] = 1
        res = sinkhorn_balance(PairMassMatrix(Q / 4, ("a", "b", "c")), temperature_rescale([1, 1, 1]),
                               max_iter=200)
        assert not res.converged
        assert res.iterations == 200
        assert res.max_marginal_error >= res.tol
        with pytest.raises(NotConvergedError):
            PairSampler(res, seed=0)

    @pytest.mark.parametrize("backend", sorted(kernels.available_backends()))
    def test_backends_agree(self, backend):
        rng = np.random.default_rng(11)
        Q = random_feasible(rng, 25)
        ref = sinkhorn_balance(Q, default_target(Q), backend="python")
        got = sinkhorn_balance(Q, default_target(Q), backend=backend)
        np.testing.assert_allclose(got.matrix, ref.matrix, atol=1e-14)
        assert got.iterations == ref.iterations

    def test_fixture_converges(self, m2m100):
        Q = pair_matrix_from_catalog(m2m100)
        res = sinkhorn_balance(Q, default_target(Q))
        assert res.converged
        assert np.array_equal(res.matrix == 0, Q.entries == 0)

    @settings(max_examples=30, deadline=None)
    @given(L=st.integers(3, 30), seed=st.integers(0, 2**32 - 1))
    def test_support_never_grows(self, L, seed):
        Q = random_feasible(np.random.default_rng(seed), L, 0.5)
        res = sinkhorn_balance(Q, default_target(Q))
        assert np.all(res.matrix[Q.entries == 0] == 0.0)
        assert np.all(res.matrix >= 0)

    def test_bad_matrix(self):
        with pytest.raises(ValueError):
            PairMassMatrix(np.eye(2), ("a", "b"))
        with pytest.raises(ValueError):
            PairMassMatrix(np.array([[0, -1], [-1, 0]]), ("a", "b"))


class TestSampling:
    def converged_uniform(self):
        return sinkhorn_balance(uniform_q(4), temperature_rescale([1, 1, 1, 1]))

    def test_single_cell(self):
        P = np.zeros((2, 2))
        P[0, 1] = 1.0
        res = SinkhornResult(P, 1, 0.0, True, ("a", "b"))
        assert {sample_pair(res, s) for s in range(50)} == {("a", "b")}

    def test_same_seed_same_sequence(self):
        res = self.converged_uniform()
        assert PairSampler(res, 42).draw(1000) == PairSampler(res, 42).draw(1000)

    def test_seed_required(self):
        with pytest.raises(ValueError):
            PairSampler(self.converged_uniform(), None)

    def test_uniform_frequencies(self):
        res = self.converged_uniform()
        idx = PairSampler(res, 2024).draw_indices(1_200_000)
        freq = np.bincount(idx, minlength=16).reshape(4, 4) / idx.size
        assert np.all(np.diag(freq) == 0)
        off = freq[~np.eye(4, dtype=bool)]
        np.testing.assert_allclose(off, 1 / 12, atol=0.002)

    def test_chi_square_goodness_of_fit(self):
        rng = np.random.default_rng(8)
        Q = random_feasible(rng, 6)
        res = sinkhorn_balance(Q, default_target(Q))
        n = 200_000
        idx = PairSampler(res, 99).draw_indices(n)
        p = res.matrix.ravel()
        mask = p > 0
        obs = np.bincount(idx, minlength=p.size)
        assert np.all(obs[~mask] == 0)
        exp = n * p[mask]
        chi2 = float(((obs[mask] - exp) ** 2 / exp).sum())
        assert chi2 < chi2_critical_99(int(mask.sum()) - 1)

    @pytest.mark.parametrize("n", [10_000, 1_000_000])
    def test_tv_at_iid_noise_floor(self, n):
        rng = np.random.default_rng(21)
        Q = random_feasible(rng, 6, zero_frac=0.0)
        res = sinkhorn_balance(Q, default_target(Q))
        floor = expected_tv(res.matrix.ravel(), n)
        tv = empirical_tv(res, PairSampler(res, 4).draw_indices(n))
        assert 0.5 * floor < tv < 1.5 * floor

    def test_empirical_tv_definition(self):
        P = np.array([[0, 0.5], [0.5, 0]])
        res = SinkhornResult(P, 1, 0.0, True, ("a", "b"))
        assert empirical_tv(res, np.array([1, 1, 1, 2])) == pytest.approx(0.25)


class TestCoverage:
    def test_full(self):
        assert dictionary_coverage({"a", "b"}, {"x": ["a", "b", "a"]}) == {"x": 1.0}

    def test_empty_dictionary(self):
        assert dictionary_coverage(set(), {"x": ["a"]}) == {"x": 0.0}

    def test_hand_count(self):
        assert dictionary_coverage({"a"}, {"x": ["a", "a", "a", "b"]})["x"] == 0.75
        assert dictionary_coverage({"a"}, {"x": {"a": 3, "b": 1}})["x"] == 0.75

    def test_empty_language_reported(self):
        with pytest.raises(ValueError, match="zz"):
            dictionary_coverage({"a"}, {"x": ["a"], "zz": []})


def test_matrix_file_round_trip(tmp_path):
    Q = random_feasible(np.random.default_rng(5), 7)
    res = sinkhorn_balance(Q, default_target(Q))
    write_matrix(res, tmp_path / "m.tsv")
    back = read_matrix(tmp_path / "m.tsv", res.diagnostics())
    assert np.array_equal(back.matrix, res.matrix)
    assert back.converged and back.iterations == res.iterations
