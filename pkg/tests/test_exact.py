import math

import numpy as np
import pytest

from hebmix.exact import (
    EnumerationLimitError,
    boltzmann_probabilities,
    pairwise_log_shift,
    partition_ahn_exact,
    partition_rbm_quadrature,
    quenched_free_energy_finite,
)
from hebmix.model import (
    PatternSet,
    generate_patterns,
    hebbian_couplings,
    mixed_hamiltonian,
)


def _all_states(n):
    idx = np.arange(1 << n)
    return (((idx[:, None] >> np.arange(n)[None, :]) & 1) * 2 - 1).astype(np.float64)


class TestEnumeration:
    def test_one_spin_closed_form(self):
        # single Gaussian pattern entry 1.0: Z = 2 exp(beta/2)
        pats = PatternSet(n=1, boolean=np.zeros((0, 1), dtype=np.int8),
                          gaussian=np.ones((1, 1)), seed=0)
        res = partition_ahn_exact(pats, beta=2.0)
        assert res.log_z == pytest.approx(math.log(2.0) + 1.0, abs=1e-14)

    def test_two_spin_boolean_hand_sum(self):
        pats = PatternSet(n=2, boolean=np.array([[1, 1]], dtype=np.int8),
                          gaussian=np.zeros((0, 2)), seed=0)
        # exponents (beta/4) (s1+s2)^2 over the four states: {1, 0, 0, 1}
        assert partition_ahn_exact(pats, 1.0).log_z == pytest.approx(
            math.log(2 * math.e + 2), abs=1e-13)

    def test_flat_measure_limit(self):
        pats = generate_patterns(6, 1, 2, seed=5)
        res = partition_ahn_exact(pats, beta=1e-12)
        assert res.log_z == pytest.approx(6 * math.log(2), abs=1e-9)

    def test_single_term_lower_bound(self):
        pats = generate_patterns(7, 1, 2, seed=9)
        beta = 1.3
        res = partition_ahn_exact(pats, beta, form="pairwise")
        sigma = pats.boolean[0]
        assert res.log_z >= -beta * mixed_hamiltonian(sigma, pats)

    def test_monotone_in_beta_ferromagnet(self):
        pats = generate_patterns(8, 1, 0, seed=1)
        vals = [partition_ahn_exact(pats, b).log_z for b in (0.2, 0.5, 1.0, 2.0, 5.0)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_oracle_against_coupling_matrix(self, rng):
        # independent route: explicit J matrix, pairwise energies, logsumexp
        pats = generate_patterns(9, 2, 2, seed=42)
        beta = 0.9
        j = hebbian_couplings(pats)
        states = _all_states(9)
        energies = -0.5 * np.einsum("si,ij,sj->s", states, j, states)
        ref = float(np.logaddexp.reduce(-beta * energies))
        res = partition_ahn_exact(pats, beta, form="pairwise")
        assert res.log_z == pytest.approx(ref, abs=1e-10)

    def test_size_guard(self):
        pats = generate_patterns(30, 1, 0, seed=0)
        with pytest.raises(EnumerationLimitError):
            partition_ahn_exact(pats, 1.0)

    def test_beta_positive_required(self):
        pats = generate_patterns(4, 1, 0, seed=0)
        with pytest.raises(ValueError):
            partition_ahn_exact(pats, 0.0)


class TestConstantShiftLemma:
    @pytest.mark.parametrize("n,k,p,beta", [(6, 0, 2, 0.8), (8, 2, 3, 1.5), (5, 1, 0, 0.3)])
    def test_pairwise_vs_full(self, n, k, p, beta):
        pats = generate_patterns(n, k, p, seed=n + k + p)
        full = partition_ahn_exact(pats, beta, form="full").log_z
        pair = partition_ahn_exact(pats, beta, form="pairwise").log_z
        assert full - pair == pytest.approx(pairwise_log_shift(pats, beta), abs=1e-12)


class TestHiddenUnitQuadrature:
    @pytest.mark.parametrize("n,p", [(4, 1), (6, 2), (8, 3)])
    @pytest.mark.parametrize("beta", [0.3, 0.8, 1.5])
    def test_matches_enumeration(self, n, p, beta):
        pats = generate_patterns(n, 0, p, seed=10 * n + p)
        ahn = partition_ahn_exact(pats, beta)
        rbm = partition_rbm_quadrature(pats, beta, nodes=96)
        assert abs(ahn.log_z - rbm.log_z) < 1e-8

    def test_with_boolean_block(self):
        pats = generate_patterns(6, 2, 2, seed=77)
        ahn = partition_ahn_exact(pats, 0.7)
        rbm = partition_rbm_quadrature(pats, 0.7, nodes=96)
        assert abs(ahn.log_z - rbm.log_z) < 1e-8

    def test_no_hidden_units_is_exact(self):
        pats = generate_patterns(6, 1, 0, seed=3)
        ahn = partition_ahn_exact(pats, 0.9)
        rbm = partition_rbm_quadrature(pats, 0.9)
        assert abs(ahn.log_z - rbm.log_z) < 1e-12

    def test_node_convergence(self):
        pats = generate_patterns(4, 0, 2, seed=3)
        a = partition_rbm_quadrature(pats, 0.7, nodes=32).log_z
        b = partition_rbm_quadrature(pats, 0.7, nodes=96).log_z
        assert abs(a - b) < 1e-8

    def test_bounds(self):
        with pytest.raises(EnumerationLimitError):
            partition_rbm_quadrature(generate_patterns(4, 0, 7, seed=1), 0.5)
        with pytest.raises(ValueError):
            partition_rbm_quadrature(generate_patterns(4, 0, 2, seed=1), 0.5, nodes=8)


class TestBoltzmannProbabilities:
    def test_normalized_and_flat_at_zero_beta(self):
        pats = generate_patterns(5, 1, 1, seed=2)
        probs = boltzmann_probabilities(pats, 1e-12)
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
        assert probs.max() - probs.min() < 1e-9

    def test_matches_direct_energies(self):
        pats = generate_patterns(6, 1, 1, seed=8)
        beta = 1.1
        probs = boltzmann_probabilities(pats, beta)
        states = _all_states(6)
        energies = np.array([mixed_hamiltonian(s, pats) for s in states])
        weights = np.exp(-beta * (energies - energies.min()))
        ref = weights / weights.sum()
        np.testing.assert_allclose(probs, ref, atol=1e-12)


class TestQuenchedFreeEnergy:
    def test_empty_disorder_is_log2(self):
        res = quenched_free_energy_finite(6, 0, 0, beta=1.0, n_disorder_samples=5, seed=1)
        assert res.mean == pytest.approx(math.log(2), abs=1e-14)
        assert res.stderr == 0.0

    def test_single_boolean_pattern_gauge_invariance(self):
        # every k=1 disorder is a gauge copy: the sample matches a fixed pattern
        res = quenched_free_energy_finite(8, 1, 0, beta=0.5, n_disorder_samples=20, seed=4)
        fixed = PatternSet(n=8, boolean=np.ones((1, 8), dtype=np.int8),
                           gaussian=np.zeros((0, 8)), seed=0)
        exact = partition_ahn_exact(fixed, 0.5, form="pairwise").log_z / 8
        assert abs(res.mean - exact) <= 3 * res.stderr + 1e-12

    def test_stderr_scaling(self):
        small = quenched_free_energy_finite(8, 0, 2, beta=0.4, n_disorder_samples=50, seed=7)
        large = quenched_free_energy_finite(8, 0, 2, beta=0.4, n_disorder_samples=800, seed=8)
        assert small.stderr > 0
        ratio = small.stderr / large.stderr
        assert 2.0 < ratio < 8.0  # ~4 expected from 1/sqrt(samples)

    def test_requires_two_samples(self):
        with pytest.raises(ValueError):
            quenched_free_energy_finite(6, 1, 1, beta=1.0, n_disorder_samples=1, seed=0)

    def test_records(self):
        res = quenched_free_energy_finite(5, 1, 1, beta=0.7, n_disorder_samples=3, seed=2)
        rec = res.to_record()
        assert rec["n"] == 5 and rec["n_samples"] == 3 and "mean" in rec
