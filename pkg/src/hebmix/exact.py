"""Brute-force partition functions and quenched free energies at small n.

Ground truth for everything else: the visible-spin sum is enumerated over
all 2^n states (log-space accumulation, so large beta is safe), and the
dual formulation with Gaussian hidden units is evaluated by factorized
Gauss-Hermite quadrature.  The two must agree to quadrature accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import get_backend
from .gauss import gauss_hermite_nodes
from .model import PatternSet, diagonal_shift, generate_patterns

ENUMERATION_CAP = 24
_PROB_CAP = 20
_CHUNK = 1 << 12


class EnumerationLimitError(ValueError):
    """System size exceeds the configured enumeration bound."""


@dataclass(frozen=True)
class ExactResult:
    """log of a partition function with the identifying parameters."""

    log_z: float
    n: int
    k: int
    p: int
    beta: float
    method: str  # "enumeration" or "quadrature"
    form: str    # "pairwise" (i<j couplings) or "full" (includes diagonal)

    def to_record(self) -> dict:
        return {"n": self.n, "k": self.k, "p": self.p, "beta": self.beta,
                "log_z": self.log_z, "method": self.method, "form": self.form}


def _check_size(n: int, max_n: int) -> None:
    if n > max_n:
        raise EnumerationLimitError(
            f"n={n} exceeds the enumeration bound {max_n}; raise max_n explicitly if you mean it")


def _subtractions(patterns: PatternSet, form: str) -> tuple[np.ndarray, np.ndarray]:
    if form == "full":
        return np.zeros(patterns.k), np.zeros(patterns.p)
    if form == "pairwise":
        # per-row diagonal terms sum_i (xi_i)^2: n for Boolean rows
        sub_b = np.full(patterns.k, float(patterns.n))
        sub_g = np.sum(patterns.gaussian.astype(np.float64) ** 2, axis=1) if patterns.p else np.zeros(0)
        return sub_b, np.ascontiguousarray(sub_g)
    raise ValueError(f"form must be 'full' or 'pairwise', got {form!r}")


def partition_ahn_exact(patterns: PatternSet, beta: float,
                        form: str = "full", max_n: int = ENUMERATION_CAP) -> ExactResult:
    """Exact log Z by summation over all 2^n spin states.

    form="full" uses the exponent (beta/2n) sum_{i,j} (all patterns) s_i s_j
    including the diagonal; form="pairwise" uses the i<j couplings.  The two
    differ by beta * diagonal_shift(patterns) exactly.
    """
    if beta <= 0.0:
        raise ValueError("beta must be > 0")
    _check_size(patterns.n, max_n)
    sub_b, sub_g = _subtractions(patterns, form)
    kern = get_backend()
    log_z = kern.enum_logz(
        np.ascontiguousarray(patterns.boolean, dtype=np.float64),
        np.ascontiguousarray(patterns.gaussian, dtype=np.float64),
        beta / (2.0 * patterns.n), np.ascontiguousarray(sub_b), sub_g)
    return ExactResult(log_z=float(log_z), n=patterns.n, k=patterns.k, p=patterns.p,
                       beta=beta, method="enumeration", form=form)


def partition_rbm_quadrature(patterns: PatternSet, beta: float, nodes: int = 96,
                             max_n: int = ENUMERATION_CAP, max_p: int = 6) -> ExactResult:
    """log Z of the bipartite form: spins enumerated, each Gaussian hidden
    unit integrated by Gauss-Hermite quadrature.

    For fixed sigma the hidden integral factorizes over units mu with
    coupling a_mu = sqrt(beta/n) sum_i x_i^mu s_i; the Boolean block enters
    as the same full-sum exponent as in partition_ahn_exact.
    """
    if beta <= 0.0:
        raise ValueError("beta must be > 0")
    _check_size(patterns.n, max_n)
    if patterns.p > max_p:
        raise EnumerationLimitError(
            f"p={patterns.p} exceeds the quadrature bound {max_p}")
    if nodes < 16:
        raise ValueError("nodes must be >= 16")
    n = patterns.n
    x, w = gauss_hermite_nodes(nodes)
    log_w = np.log(w)
    bt = patterns.boolean.astype(np.float64).T  # (n, k)
    gt = patterns.gaussian.astype(np.float64).T  # (n, p)
    coef_bool = beta / (2.0 * n)
    scale = math.sqrt(beta / n)
    bits = np.arange(n, dtype=np.int64)
    total = 1 << n
    mx = -math.inf
    acc = 0.0
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        signs = (((idx[:, None] >> bits[None, :]) & 1) * 2 - 1).astype(np.float64)
        expo = np.zeros(idx.shape[0])
        if patterns.k:
            m = signs @ bt
            expo += coef_bool * np.sum(m * m, axis=1)
        if patterns.p:
            a = scale * (signs @ gt)  # (chunk, p)
            # log E_z exp(a z) per hidden unit, via log-sum-exp over nodes
            args = a[:, :, None] * x[None, None, :] + log_w[None, None, :]
            amax = args.max(axis=2)
            expo += np.sum(amax + np.log(np.sum(np.exp(args - amax[:, :, None]), axis=2)), axis=1)
        cmx = float(expo.max())
        csum = float(np.exp(expo - cmx).sum())
        if cmx > mx:
            acc = acc * math.exp(mx - cmx) + csum if acc else csum
            mx = cmx
        else:
            acc += csum * math.exp(cmx - mx)
    return ExactResult(log_z=mx + math.log(acc), n=n, k=patterns.k, p=patterns.p,
                       beta=beta, method="quadrature", form="full")


def pairwise_log_shift(patterns: PatternSet, beta: float) -> float:
    """log Z_full - log Z_pairwise = beta * diagonal_shift(patterns)."""
    return beta * diagonal_shift(patterns)


def boltzmann_probabilities(patterns: PatternSet, beta: float,
                            max_n: int = _PROB_CAP) -> np.ndarray:
    """Exact Gibbs probabilities over all 2^n states.

    State index convention: bit i set <=> spin i equals +1 (matches the
    Monte Carlo histogram).  The pairwise and full forms give identical
    probabilities since they differ by a constant energy shift.
    """
    _check_size(patterns.n, max_n)
    n = patterns.n
    bits = np.arange(n, dtype=np.int64)
    idx = np.arange(1 << n, dtype=np.int64)
    signs = (((idx[:, None] >> bits[None, :]) & 1) * 2 - 1).astype(np.float64)
    expo = np.zeros(idx.shape[0])
    coef = beta / (2.0 * n)
    if patterns.k:
        m = signs @ patterns.boolean.astype(np.float64).T
        expo += coef * np.sum(m * m, axis=1)
    if patterns.p:
        g = signs @ patterns.gaussian.T
        expo += coef * np.sum(g * g, axis=1)
    expo -= expo.max()
    weights = np.exp(expo)
    return weights / weights.sum()


@dataclass(frozen=True)
class QuenchedFreeEnergy:
    """Disorder-averaged (1/n) log Z with its sampling error."""

    mean: float
    stderr: float
    n: int
    k: int
    p: int
    beta: float
    n_samples: int
    seed: int
    form: str

    def to_record(self) -> dict:
        return {"n": self.n, "k": self.k, "p": self.p, "beta": self.beta,
                "mean": self.mean, "stderr": self.stderr,
                "n_samples": self.n_samples, "seed": self.seed, "form": self.form}


def quenched_free_energy_finite(n: int, k: int, p: int, beta: float,
                                n_disorder_samples: int, seed: int,
                                form: str = "pairwise",
                                max_n: int = ENUMERATION_CAP) -> QuenchedFreeEnergy:
    """Sample mean and standard error of (1/n) log Z over disorder draws."""
    if n_disorder_samples < 2:
        raise ValueError("need at least 2 disorder samples for a standard error")
    _check_size(n, max_n)
    child_seeds = _spawn_seeds(seed, n_disorder_samples)
    vals = np.empty(n_disorder_samples)
    for i, s in enumerate(child_seeds):
        pats = generate_patterns(n, k, p, s)
        vals[i] = partition_ahn_exact(pats, beta, form=form, max_n=max_n).log_z / n
    stderr = float(vals.std(ddof=1) / math.sqrt(n_disorder_samples))
    return QuenchedFreeEnergy(mean=float(vals.mean()), stderr=stderr, n=n, k=k, p=p,
                              beta=beta, n_samples=n_disorder_samples, seed=int(seed),
                              form=form)


def _spawn_seeds(seed: int, count: int) -> list[int]:
    """Independent 64-bit child seeds, reproducible from the parent seed."""
    ss = np.random.SeedSequence(seed)
    return [int(child.generate_state(1, np.uint64)[0]) for child in ss.spawn(count)]
