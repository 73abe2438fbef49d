import math

import numpy as np
import pytest

from hebmix.model import (
    PatternSet,
    diagonal_shift,
    generate_patterns,
    hebbian_couplings,
    hidden_overlap,
    mattis_magnetization,
    mixed_hamiltonian,
    observables,
    replica_overlap,
)


class TestGeneratePatterns:
    def test_empty_disorder(self):
        pats = generate_patterns(4, 0, 0, seed=7)
        assert pats.boolean.shape == (0, 4)
        assert pats.gaussian.shape == (0, 4)

    def test_shapes_and_entries(self):
        pats = generate_patterns(100, 2, 5, seed=1)
        assert pats.boolean.shape == (2, 100)
        assert pats.gaussian.shape == (5, 100)
        assert set(np.unique(pats.boolean)) == {-1, 1}

    def test_deterministic(self):
        a = generate_patterns(50, 3, 4, seed=123)
        b = generate_patterns(50, 3, 4, seed=123)
        assert np.array_equal(a.boolean, b.boolean)
        assert np.array_equal(a.gaussian, b.gaussian)

    def test_snapshot_roundtrip(self, tmp_path):
        pats = generate_patterns(30, 2, 3, seed=99)
        path = tmp_path / "patterns.json"
        pats.save(path)
        again = PatternSet.load(path)
        assert np.array_equal(pats.boolean, again.boolean)
        assert np.array_equal(pats.gaussian, again.gaussian)

    def test_moment_statistics(self):
        # grand means over many seeds: fair coin and standard normal
        n, seeds = 100, 300
        bool_mean = np.mean([generate_patterns(n, 2, 5, seed=s).boolean.mean()
                             for s in range(seeds)])
        gauss = np.concatenate([generate_patterns(n, 0, 5, seed=s).gaussian.ravel()
                                for s in range(50)])
        assert abs(bool_mean) < 3.5 / math.sqrt(2 * n * seeds)
        assert abs(gauss.mean()) < 3.5 / math.sqrt(gauss.size)
        assert abs(gauss.var() - 1.0) < 0.02

    def test_immutability(self):
        pats = generate_patterns(10, 1, 1, seed=0)
        with pytest.raises(ValueError):
            pats.boolean[0, 0] = -pats.boolean[0, 0]

    def test_rejects_bad_entries(self):
        with pytest.raises(ValueError):
            PatternSet(n=3, boolean=np.array([[1, 2, -1]], dtype=np.int8),
                       gaussian=np.zeros((0, 3)), seed=0)


class TestHebbianCouplings:
    def test_two_spin_aligned(self):
        pats = PatternSet(n=2, boolean=np.array([[1, 1]], dtype=np.int8),
                          gaussian=np.zeros((0, 2)), seed=0)
        j = hebbian_couplings(pats)
        assert j[0, 1] == pytest.approx(0.5)

    def test_two_spin_anti(self):
        pats = PatternSet(n=2, boolean=np.array([[1, -1]], dtype=np.int8),
                          gaussian=np.zeros((0, 2)), seed=0)
        assert hebbian_couplings(pats)[0, 1] == pytest.approx(-0.5)

    def test_symmetric_zero_diagonal(self):
        pats = generate_patterns(20, 2, 3, seed=5)
        j = hebbian_couplings(pats)
        assert np.array_equal(j, j.T)
        assert np.all(np.diag(j) == 0.0)


class TestMixedHamiltonian:
    def test_aligned_state(self):
        n = 12
        pats = generate_patterns(n, 1, 0, seed=3)
        sigma = pats.boolean[0]
        assert mixed_hamiltonian(sigma, pats) == pytest.approx(-(n - 1) / 2)

    def test_empty_disorder_zero(self):
        pats = generate_patterns(5, 0, 0, seed=1)
        assert mixed_hamiltonian(np.ones(5), pats) == 0.0

    def test_three_site_hand_enumeration(self):
        pats = PatternSet(n=3, boolean=np.array([[1, 1, -1]], dtype=np.int8),
                          gaussian=np.zeros((0, 3)), seed=0)
        sigma = np.ones(3)
        # pairs (1,2): +1, (1,3): -1, (2,3): -1 -> H = -(1/3)(1 - 1 - 1)
        assert mixed_hamiltonian(sigma, pats) == pytest.approx(1.0 / 3.0)

    def test_gauge_symmetry(self, rng):
        pats = generate_patterns(17, 2, 4, seed=8)
        for _ in range(5):
            sigma = rng.choice([-1, 1], size=17)
            assert mixed_hamiltonian(sigma, pats) == pytest.approx(
                mixed_hamiltonian(-sigma, pats), abs=1e-12)

    def test_matches_pairwise_loop(self, rng):
        pats = generate_patterns(9, 1, 2, seed=4)
        j = hebbian_couplings(pats)
        for _ in range(4):
            sigma = rng.choice([-1.0, 1.0], size=9)
            brute = -sum(j[i, l] * sigma[i] * sigma[l]
                         for i in range(9) for l in range(i + 1, 9))
            assert mixed_hamiltonian(sigma, pats) == pytest.approx(brute, abs=1e-12)

    def test_energy_magnetization_identity(self, rng):
        # full-sum energy equals -(N/2) sum_mu m_mu^2
        for n, k, p in [(10, 1, 3), (50, 2, 5)]:
            pats = generate_patterns(n, k, p, seed=n)
            sigma = rng.choice([-1.0, 1.0], size=n)
            full = mixed_hamiltonian(sigma, pats) - diagonal_shift(pats)
            obs = observables(sigma, pats)
            assert full == pytest.approx(-(n / 2) * float(np.sum(obs.mattis**2)), abs=1e-12)

    def test_shape_mismatch(self):
        pats = generate_patterns(6, 1, 1, seed=2)
        with pytest.raises(ValueError):
            mixed_hamiltonian(np.ones(5), pats)


class TestOverlaps:
    def test_mattis_perfect_retrieval(self):
        pats = generate_patterns(40, 1, 0, seed=11)
        row = pats.boolean[0]
        assert mattis_magnetization(row, row) == 1.0
        assert mattis_magnetization(-row, row) == -1.0

    def test_mattis_random_state_is_small(self):
        n = 10_000
        pats = generate_patterns(n, 1, 0, seed=21)
        for seed in range(5):
            sigma = 2 * np.random.default_rng(seed).integers(0, 2, n) - 1
            assert abs(mattis_magnetization(sigma, pats.boolean[0])) < 0.04

    def test_mattis_length_mismatch(self):
        with pytest.raises(ValueError):
            mattis_magnetization(np.ones(3), np.ones(4))

    def test_replica_overlap_cases(self):
        a = np.array([1, 1, -1, -1])
        b = np.array([1, -1, -1, 1])
        assert replica_overlap(a, a) == 1.0
        assert replica_overlap(a, -a) == -1.0
        assert replica_overlap(a, b) == 0.0
        assert replica_overlap(a, b) == replica_overlap(b, a)

    def test_hidden_overlap_cases(self):
        ones = np.ones(5)
        assert hidden_overlap(ones, ones) == 1.0
        assert hidden_overlap(ones, -ones) == -1.0
        assert hidden_overlap(np.array([1.0, 2.0]), np.array([3.0, -1.0])) == 0.5

    def test_hidden_overlap_empty_errors(self):
        with pytest.raises(ValueError):
            hidden_overlap(np.zeros(0), np.zeros(0))

    def test_observables_bounds(self, rng):
        pats = generate_patterns(25, 3, 2, seed=6)
        sigma = rng.choice([-1, 1], size=25)
        obs = observables(sigma, pats)
        assert obs.mattis.shape == (5,)
        assert np.all(np.abs(obs.mattis[:3]) <= 1.0)
