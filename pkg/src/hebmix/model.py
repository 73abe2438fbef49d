"""Disorder, spin configurations, Hamiltonians and observables.

A disorder realization holds k Boolean (+-1) patterns and p Gaussian
patterns for N neurons.  The couplings follow the Hebb rule

    J_ij = (1/N) (sum_nu xt_i^nu xt_j^nu + sum_mu x_i^mu x_j^mu),  J_ii = 0,

and the network energy is the pairwise (i < j) quadratic form in J.  All
containers are immutable after construction and safe to share across
worker processes or threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class PatternSet:
    """Quenched disorder: k Boolean and p Gaussian patterns for n neurons.

    Matrices are pattern-major (k x n, p x n).  Only (n, k, p, seed) are
    serialized; the matrices regenerate bit-exactly from the seed.
    """

    n: int
    boolean: np.ndarray   # (k, n) int8, entries +-1
    gaussian: np.ndarray  # (p, n) float64
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.boolean.ndim != 2 or self.boolean.shape[1] != self.n:
            raise ValueError(f"boolean patterns must be (k, {self.n})")
        if self.gaussian.ndim != 2 or self.gaussian.shape[1] != self.n:
            raise ValueError(f"gaussian patterns must be (p, {self.n})")
        if self.boolean.size and not np.all(np.abs(self.boolean) == 1):
            raise ValueError("boolean pattern entries must be +-1")
        self.boolean.setflags(write=False)
        self.gaussian.setflags(write=False)

    @property
    def k(self) -> int:
        return self.boolean.shape[0]

    @property
    def p(self) -> int:
        return self.gaussian.shape[0]

    def to_snapshot(self) -> dict:
        return {"n": self.n, "k": self.k, "p": self.p, "seed": self.seed}

    @staticmethod
    def from_snapshot(snap: dict) -> "PatternSet":
        return generate_patterns(snap["n"], snap["k"], snap["p"], snap["seed"])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_snapshot(), indent=2) + "\n")

    @staticmethod
    def load(path: str | Path) -> "PatternSet":
        return PatternSet.from_snapshot(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class Observables:
    """Mattis overlaps with every stored pattern plus the energy."""

    mattis: np.ndarray  # (k + p,), Boolean rows first
    energy: float


def generate_patterns(n: int, k: int, p: int, seed: int) -> PatternSet:
    """Draw k fair-coin Boolean and p standard-normal patterns.

    Deterministic given the seed; the Boolean block is drawn first, so the
    Gaussian block depends on (seed, n, k) only through the stream position.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if k < 0 or p < 0:
        raise ValueError("pattern counts must be >= 0")
    rng = np.random.default_rng(seed)
    boolean = (2 * rng.integers(0, 2, size=(k, n), dtype=np.int8) - 1).astype(np.int8)
    gaussian = rng.standard_normal((p, n))
    return PatternSet(n=n, boolean=boolean, gaussian=gaussian, seed=int(seed))


def hebbian_couplings(patterns: PatternSet) -> np.ndarray:
    """Dense N x N Hebbian coupling matrix, symmetric with zero diagonal."""
    b = patterns.boolean.astype(np.float64)
    g = patterns.gaussian
    j = (b.T @ b + g.T @ g) / patterns.n
    np.fill_diagonal(j, 0.0)
    return j


def _check_spins(sigma: np.ndarray, n: int) -> np.ndarray:
    sigma = np.asarray(sigma)
    if sigma.shape != (n,):
        raise ValueError(f"spin configuration must have shape ({n},), got {sigma.shape}")
    return sigma.astype(np.float64)


def pattern_overlaps(sigma: np.ndarray, patterns: PatternSet) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized overlaps (M_nu, G_mu) = (sum_i xt_i^nu s_i, sum_i x_i^mu s_i)."""
    s = _check_spins(sigma, patterns.n)
    return patterns.boolean.astype(np.float64) @ s, patterns.gaussian @ s


def mixed_hamiltonian(sigma: np.ndarray, patterns: PatternSet) -> float:
    """Pairwise energy H = -(1/N) sum_{i<j} (Hebb sum over all patterns) s_i s_j.

    Evaluated through the overlaps: sum_{i<j} a_i a_j = ((sum a)^2 - sum a^2)/2.
    """
    m, g = pattern_overlaps(sigma, patterns)
    n = patterns.n
    bool_part = float(np.sum(m * m)) - n * patterns.k
    gauss_part = float(np.sum(g * g)) - float(np.sum(patterns.gaussian**2))
    return -(bool_part + gauss_part) / (2.0 * n)


def diagonal_shift(patterns: PatternSet) -> float:
    """Configuration-independent gap between the pairwise and full-sum energies.

    H_pairwise = H_full + (1/2N) sum_i sum_mu (x_i^mu)^2 + k/2.
    """
    return float(np.sum(patterns.gaussian**2)) / (2.0 * patterns.n) + patterns.k / 2.0


def mattis_magnetization(sigma: np.ndarray, pattern_row: np.ndarray) -> float:
    """Overlap (1/N) sum_i xi_i sigma_i between one pattern and the spins."""
    sigma = np.asarray(sigma, dtype=np.float64)
    row = np.asarray(pattern_row, dtype=np.float64)
    if sigma.shape != row.shape or sigma.ndim != 1:
        raise ValueError("spin and pattern vectors must have equal length")
    return float(row @ sigma) / sigma.shape[0]


def replica_overlap(sigma_a: np.ndarray, sigma_b: np.ndarray) -> float:
    """Visible overlap q_ab = (1/N) sum_i s_i^a s_i^b, in [-1, 1]."""
    a = np.asarray(sigma_a, dtype=np.float64)
    b = np.asarray(sigma_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("replicas must have equal length")
    return float(a @ b) / a.shape[0]


def hidden_overlap(z_a: np.ndarray, z_b: np.ndarray) -> float:
    """Hidden-unit overlap p_ab = (1/p) sum_mu z_mu^a z_mu^b (p >= 1)."""
    a = np.asarray(z_a, dtype=np.float64)
    b = np.asarray(z_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("hidden vectors must have equal length")
    if a.shape[0] == 0:
        raise ValueError("hidden overlap undefined for p = 0")
    return float(a @ b) / a.shape[0]


def observables(sigma: np.ndarray, patterns: PatternSet) -> Observables:
    """Mattis vector over all k + p patterns (Boolean first) and the energy."""
    m, g = pattern_overlaps(sigma, patterns)
    mattis = np.concatenate([m, g]) / patterns.n
    mattis.setflags(write=False)
    return Observables(mattis=mattis, energy=mixed_hamiltonian(sigma, patterns))
