"""Single-spin-flip sampling of the mixed-network Gibbs measure.

Glauber heat-bath by default (flip probability 1/(1+exp(2 beta s_i h_i)),
rejection-free mixing at low temperature), Metropolis behind a flag.  Local
fields are maintained incrementally through the pattern overlaps
M_nu = sum_i xt_i^nu s_i and G_mu = sum_i x_i^mu s_i, so one flip costs
O(k + p) instead of O(N):

    h_i = (sum_nu xt_i^nu M_nu + sum_mu x_i^mu G_mu - s_i D_i) / N,
    D_i = k + sum_mu (x_i^mu)^2.

All randomness is pre-drawn from a seeded generator in a fixed block
pattern and fed to the active kernel backend, so runs are bit-reproducible
per backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import backend_name, get_backend
from .model import PatternSet, generate_patterns

INIT_PATTERN = "pattern"
INIT_RANDOM = "random"
INIT_ALL_UP = "all-up"

_ENERGY_TRACE_CAP = 512
_HISTOGRAM_CAP = 20


@dataclass(frozen=True)
class McConfig:
    n: int
    alpha: float
    k: int
    beta: float
    sweeps: int
    seed: int
    thermalization_fraction: float = 0.5
    init: str = INIT_PATTERN
    init_pattern: int = 1
    n_replicas: int = 1
    rule: str = "glauber"
    blocks: int = 20
    record_energy: bool = True

    def __post_init__(self):
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if not (0.0 < self.thermalization_fraction < 1.0):
            raise ValueError("thermalization_fraction must be in (0, 1)")
        if self.init not in (INIT_PATTERN, INIT_RANDOM, INIT_ALL_UP):
            raise ValueError(f"unknown init {self.init!r}")
        if self.init == INIT_PATTERN and not (1 <= self.init_pattern <= self.k):
            raise ValueError("pattern-aligned init needs 1 <= init_pattern <= k")
        if self.n_replicas not in (1, 2):
            raise ValueError("n_replicas must be 1 or 2")
        if self.rule not in ("glauber", "metropolis"):
            raise ValueError("rule must be 'glauber' or 'metropolis'")

    @property
    def p(self) -> int:
        return int(round(self.alpha * self.n))

    @property
    def thermalization_sweeps(self) -> int:
        return min(self.sweeps - 1, int(round(self.sweeps * self.thermalization_fraction)))

    def to_record(self) -> dict:
        return {
            "n": self.n, "alpha": self.alpha, "k": self.k, "beta": self.beta,
            "sweeps": self.sweeps, "seed": self.seed,
            "thermalization_fraction": self.thermalization_fraction,
            "init": self.init, "init_pattern": self.init_pattern,
            "n_replicas": self.n_replicas, "rule": self.rule, "blocks": self.blocks,
            "record_energy": self.record_energy,
        }


@dataclass(frozen=True)
class McResult:
    mattis_mean: np.ndarray  # (k,) time-averaged |m_nu| post-thermalization
    mattis_err: np.ndarray
    q12_mean: float | None
    q12_err: float | None
    energy_mean: float
    energy_err: float
    energy_trace: np.ndarray | None
    acceptance_rate: float | None  # Metropolis only
    samples: int
    flips: int
    backend: str


def trial_seeds(seed: int, n_replicas: int = 1) -> tuple[int, list[int]]:
    """(disorder_seed, chain_seeds) derived reproducibly from one seed."""
    children = np.random.SeedSequence(seed).spawn(1 + n_replicas)
    ints = [int(c.generate_state(1, np.uint64)[0]) for c in children]
    return ints[0], ints[1:]


def _block_sweeps(n: int) -> int:
    # bound the pre-drawn random arrays to ~32 MiB
    return max(1, min(4096, (1 << 22) // max(n, 1)))


def _initial_state(cfg: McConfig, patterns: PatternSet, rng: np.random.Generator) -> np.ndarray:
    if cfg.init == INIT_PATTERN:
        return patterns.boolean[cfg.init_pattern - 1].astype(np.int8).copy()
    if cfg.init == INIT_ALL_UP:
        return np.ones(cfg.n, dtype=np.int8)
    return (2 * rng.integers(0, 2, size=cfg.n, dtype=np.int8) - 1).astype(np.int8)


def _check_patterns(cfg: McConfig, patterns: PatternSet) -> None:
    if patterns.n != cfg.n:
        raise ValueError(f"pattern size {patterns.n} != configured n {cfg.n}")
    if patterns.k != cfg.k:
        raise ValueError(f"pattern count k={patterns.k} != configured k {cfg.k}")
    if patterns.p != cfg.p:
        raise ValueError(
            f"need p = round(alpha n) = {cfg.p} Gaussian patterns, got {patterns.p}")


def _run_chain(cfg: McConfig, patterns: PatternSet, chain_seed: int,
               want_sigma: bool, hist: np.ndarray | None = None):
    """One chain: returns (m_trace, e_trace, sigma_trace, flips)."""
    kern = get_backend()
    n, k, p = cfg.n, cfg.k, cfg.p
    bool_t = np.ascontiguousarray(patterns.boolean.T, dtype=np.float64)
    gauss_t = np.ascontiguousarray(patterns.gaussian.T, dtype=np.float64)
    diag = k + np.sum(gauss_t * gauss_t, axis=1)
    const0 = float(n * k + np.sum(gauss_t * gauss_t))
    rng = np.random.default_rng(chain_seed)
    sigma = _initial_state(cfg, patterns, rng)
    mm = bool_t.T @ sigma.astype(np.float64) if k else np.zeros(0)
    gg = gauss_t.T @ sigma.astype(np.float64) if p else np.zeros(0)
    mm = np.ascontiguousarray(mm)
    gg = np.ascontiguousarray(gg)

    m_trace = np.empty((cfg.sweeps, k))
    e_trace = np.empty(cfg.sweeps)
    sig_trace = np.empty((cfg.sweeps, n), dtype=np.int8) if want_sigma else None

    metropolis = 1 if cfg.rule == "metropolis" else 0
    block = _block_sweeps(n)
    n_therm = cfg.thermalization_sweeps
    # histogram counting starts only after thermalization: split there
    boundaries = [0, n_therm, cfg.sweeps] if hist is not None else [0, cfg.sweeps]
    flips = 0
    site_ids = np.arange(n, dtype=np.int64)
    for seg_start, seg_end in zip(boundaries[:-1], boundaries[1:]):
        seg_hist = hist if (hist is not None and seg_start >= n_therm) else None
        done = seg_start
        while done < seg_end:
            b = min(block, seg_end - done)
            perms = rng.permuted(np.tile(site_ids, (b, 1)), axis=1)
            unifs = rng.random((b, n))
            flips += kern.run_chain(
                bool_t, gauss_t, diag, const0, sigma, mm, gg, cfg.beta,
                perms, unifs, metropolis,
                m_trace[done:done + b], e_trace[done:done + b],
                sig_trace[done:done + b] if want_sigma else None,
                seg_hist)
            done += b
    return m_trace, e_trace, sig_trace, flips


def _blocked_stats(series: np.ndarray, blocks: int) -> tuple[float, float]:
    """Mean and blocking standard error (autocorrelation-robust)."""
    nb = max(1, min(blocks, series.shape[0]))
    usable = (series.shape[0] // nb) * nb
    chunk = series[series.shape[0] - usable:].reshape(nb, -1)
    means = chunk.mean(axis=1)
    err = float(means.std(ddof=1) / math.sqrt(nb)) if nb > 1 else 0.0
    return float(means.mean()), err


def run_dynamics(cfg: McConfig, patterns: PatternSet) -> McResult:
    """Sample the Gibbs measure and average observables post-thermalization.

    Deterministic given (cfg, patterns) and the active backend.  With two
    replicas the chains share the disorder but use independent thermal
    noise; q12 is their per-sweep overlap.
    """
    _check_patterns(cfg, patterns)
    _, chain_seeds = trial_seeds(cfg.seed, cfg.n_replicas)
    want_sigma = cfg.n_replicas == 2
    traces = [_run_chain(cfg, patterns, cs, want_sigma) for cs in chain_seeds]

    n_therm = cfg.thermalization_sweeps
    m_eq = np.abs(traces[0][0][n_therm:]) / cfg.n
    mattis_mean = np.empty(cfg.k)
    mattis_err = np.empty(cfg.k)
    for nu in range(cfg.k):
        mattis_mean[nu], mattis_err[nu] = _blocked_stats(m_eq[:, nu], cfg.blocks)

    e_eq = traces[0][1][n_therm:] / cfg.n
    energy_mean, energy_err = _blocked_stats(e_eq, cfg.blocks)

    q12_mean = q12_err = None
    if cfg.n_replicas == 2:
        sa = traces[0][2][n_therm:].astype(np.float64)
        sb = traces[1][2][n_therm:].astype(np.float64)
        q12 = np.sum(sa * sb, axis=1) / cfg.n
        q12_mean, q12_err = _blocked_stats(q12, cfg.blocks)

    total_flips = sum(t[3] for t in traces)
    acceptance = None
    if cfg.rule == "metropolis":
        acceptance = total_flips / (cfg.sweeps * cfg.n * cfg.n_replicas)

    trace = None
    if cfg.record_energy:
        stride = max(1, e_eq.shape[0] // _ENERGY_TRACE_CAP)
        trace = e_eq[::stride].copy()

    return McResult(mattis_mean=mattis_mean, mattis_err=mattis_err,
                    q12_mean=q12_mean, q12_err=q12_err,
                    energy_mean=energy_mean, energy_err=energy_err,
                    energy_trace=trace, acceptance_rate=acceptance,
                    samples=cfg.sweeps - n_therm, flips=total_flips,
                    backend=backend_name())


def state_histogram(cfg: McConfig, patterns: PatternSet) -> tuple[np.ndarray, int]:
    """Post-thermalization visit counts over all 2^n states (n <= 20).

    State index: bit i set <=> spin i equals +1, matching
    ``exact.boltzmann_probabilities``.
    """
    _check_patterns(cfg, patterns)
    if cfg.n > _HISTOGRAM_CAP:
        raise ValueError(f"histogram supported for n <= {_HISTOGRAM_CAP}")
    if cfg.n_replicas != 1:
        raise ValueError("histogram runs use a single replica")
    _, chain_seeds = trial_seeds(cfg.seed, 1)
    hist = np.zeros(1 << cfg.n, dtype=np.int64)
    _run_chain(cfg, patterns, chain_seeds[0], want_sigma=False, hist=hist)
    return hist, cfg.sweeps - cfg.thermalization_sweeps


def local_field(sigma: np.ndarray, couplings: np.ndarray, i: int) -> float:
    """Dense-route field h_i = sum_{j != i} J_ij s_j (J has zero diagonal)."""
    n = couplings.shape[0]
    if not (0 <= i < n):
        raise IndexError(f"site index {i} out of range for n={n}")
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != (n,):
        raise ValueError("spin configuration length must match the coupling matrix")
    return float(couplings[i] @ sigma)


def local_fields_incremental(sigma: np.ndarray, patterns: PatternSet) -> np.ndarray:
    """All fields at once from the cached overlaps; O(N (k+p)) total."""
    s = np.asarray(sigma, dtype=np.float64)
    if s.shape != (patterns.n,):
        raise ValueError("spin configuration length must match the patterns")
    bool_t = patterns.boolean.astype(np.float64).T
    gauss_t = patterns.gaussian.T
    mm = bool_t.T @ s
    gg = gauss_t.T @ s
    diag = patterns.k + np.sum(gauss_t * gauss_t, axis=1)
    return (bool_t @ mm + gauss_t @ gg - s * diag) / patterns.n


def retrieval_trial(n: int, alpha: float, k: int, beta: float, sweeps: int,
                    seed: int, rule: str = "glauber") -> float:
    """Pattern-aligned quench: time-averaged |m_1| over the last 25% of sweeps.

    Disorder and thermal noise derive from the single seed; the empirical
    retrieval diagnostic used to cross-validate the solver's phase diagram.
    """
    cfg = McConfig(n=n, alpha=alpha, k=k, beta=beta, sweeps=sweeps, seed=seed,
                   thermalization_fraction=0.75, init=INIT_PATTERN, init_pattern=1,
                   rule=rule, record_energy=False)
    disorder_seed, _ = trial_seeds(seed, 1)
    patterns = generate_patterns(n, k, cfg.p, disorder_seed)
    result = run_dynamics(cfg, patterns)
    return float(result.mattis_mean[0])
