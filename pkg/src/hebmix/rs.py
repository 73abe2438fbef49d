"""Replica-symmetric self-consistency solver.

Order parameters are the condensed magnetization m, the visible replica
overlap q and the hidden-unit overlap p_bar.  With the load ratio alpha and
inverse temperature beta the stationarity conditions read

    p_bar = beta q / (1 - beta (1 - q))^2
    q     = E_eta tanh^2(beta m + sqrt(alpha beta p_bar) eta)
    m     = E_eta tanh  (beta m + sqrt(alpha beta p_bar) eta)

(the +-1 pattern average collapses by gauge symmetry under the single
condensed-pattern ansatz), and the trial pressure is

    A = -alpha beta / 2 - (alpha/2) ln(1 - beta(1-q))
        + alpha beta q / (2 (1 - beta(1-q))) - (beta/2) m^2 + ln 2
        + E_eta ln cosh(beta m + sqrt(alpha beta p_bar) eta)
        - (alpha beta / 2) p_bar (1 - q).

Stationary points are found by damped fixed-point iteration with adaptive
damping; distinct branches (paramagnet / spin glass / retrieval) come from
canonical starts and are ordered by A (larger pressure = thermodynamically
preferred).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .gauss import gaussian_expectation, mean_log_cosh, mean_tanh_pair

__all__ = [
    "RSOrderParams", "SolverSettings", "RSSolution", "SingularSelfConsistencyError",
    "self_consistency_rhs", "solve_fixed_point", "rs_free_energy",
    "enumerate_branches", "canonical_inits", "gaussian_expectation",
    "mixture_rhs", "solve_mixture",
]

BRANCH_PARAMAGNET = "paramagnet"
BRANCH_SPIN_GLASS = "spin-glass"
BRANCH_RETRIEVAL = "retrieval"


class SingularSelfConsistencyError(RuntimeError):
    """The hidden-overlap map hit the 1 - beta(1-q) singularity."""

    def __init__(self, alpha: float, beta: float, q: float):
        self.alpha, self.beta, self.q = alpha, beta, q
        super().__init__(
            f"self-consistency map singular: 1 - beta(1-q) <= epsilon "
            f"at alpha={alpha!r}, beta={beta!r}, q={q!r}")


@dataclass(frozen=True)
class RSOrderParams:
    m: float
    q: float
    p_bar: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.m, self.q, self.p_bar)


@dataclass(frozen=True)
class SolverSettings:
    quadrature_nodes: int = 64
    damping: float = 0.5
    tol: float = 1e-12
    max_iter: int = 200_000
    singularity_epsilon: float = 1e-9
    m_threshold: float = 1e-4   # |m| above this labels a retrieval branch
    q_threshold: float = 1e-6   # q above this labels a spin-glass branch

    def __post_init__(self):
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping must be in (0, 1]")
        if self.tol <= 0.0 or self.max_iter < 1 or self.quadrature_nodes < 8:
            raise ValueError("invalid solver settings")


@dataclass(frozen=True)
class RSSolution:
    alpha: float
    beta: float
    params: RSOrderParams
    free_energy: float
    converged: bool
    iterations: int
    branch_label: str
    residual: float
    nodes: int
    init_label: str = ""
    diagnostic: str | None = None

    def to_record(self, gamma: float = 0.0) -> dict:
        return {
            "alpha": self.alpha, "beta": self.beta, "gamma": gamma,
            "m": self.params.m, "q": self.params.q, "p_bar": self.params.p_bar,
            "free_energy": self.free_energy, "branch": self.branch_label,
            "converged": self.converged, "iterations": self.iterations,
            "nodes": self.nodes,
        }


def _selfp(q: float, beta: float) -> float:
    d = 1.0 - beta * (1.0 - q)
    return beta * q / (d * d)


def self_consistency_rhs(x: RSOrderParams, alpha: float, beta: float,
                         settings: SolverSettings = SolverSettings()) -> RSOrderParams:
    """One application of the stationarity map.

    p_bar is refreshed first from the incoming q; the Gaussian field width
    for the m and q averages is sqrt(alpha beta p_bar').
    """
    d = 1.0 - beta * (1.0 - x.q)
    if d <= settings.singularity_epsilon:
        raise SingularSelfConsistencyError(alpha, beta, x.q)
    p_new = _selfp(x.q, beta)
    s = math.sqrt(max(alpha * beta * p_new, 0.0))
    m_new, q_new = mean_tanh_pair(beta * x.m, s, settings.quadrature_nodes)
    return RSOrderParams(m=m_new, q=q_new, p_bar=p_new)


def rs_free_energy(x: RSOrderParams, alpha: float, beta: float,
                   nodes: int = 64) -> float:
    """Trial pressure A at the given order parameters (see module docstring).

    At alpha = 0 every load-carrying term vanishes and A reduces to the
    single-pattern mean-field pressure, valid at any beta.
    """
    if alpha == 0.0:
        return (math.log(2.0) - 0.5 * beta * x.m * x.m
                + mean_log_cosh(beta * x.m, 0.0, nodes))
    d = 1.0 - beta * (1.0 - x.q)
    if d <= 0.0:
        raise ValueError(f"free energy undefined: 1 - beta(1-q) = {d!r} <= 0")
    s = math.sqrt(max(alpha * beta * x.p_bar, 0.0))
    return (-0.5 * alpha * beta
            - 0.5 * alpha * math.log(d)
            + 0.5 * alpha * beta * x.q / d
            - 0.5 * beta * x.m * x.m
            + math.log(2.0)
            + mean_log_cosh(beta * x.m, s, nodes)
            - 0.5 * alpha * beta * x.p_bar * (1.0 - x.q))


def _label(m: float, q: float, settings: SolverSettings) -> str:
    if abs(m) > settings.m_threshold:
        return BRANCH_RETRIEVAL
    if q > settings.q_threshold:
        return BRANCH_SPIN_GLASS
    return BRANCH_PARAMAGNET


# stagnation control: windows are in iterations
_STALL_WINDOW = 40
_RECOVER_WINDOW = 100
_GIVE_UP_WINDOW = 2000


def solve_fixed_point(alpha: float, beta: float, init: RSOrderParams,
                      settings: SolverSettings = SolverSettings(),
                      init_label: str = "") -> RSSolution:
    """Damped iteration (m, q) <- (1-lam)(m, q) + lam rhs(m, q) until the
    residual max(|dm|, |dq|, |dp|/max(1, p)) drops below tol.

    p_bar is an algebraic function of q and is refreshed undamped each step
    (damping it would only inject stale memory of transients; it never
    feeds back into the map).  The damping halves on oscillation or
    stagnation and doubles back after sustained progress; q is clamped to
    keep 1 - beta(1-q) positive along the trajectory (the converged point
    itself is always interior).  A non-converged result carries a
    diagnostic instead of raising.
    """
    lam0 = settings.damping
    lam = lam0
    lam_min = lam0 / 1024.0
    m, q = init.m, init.q
    pbar = init.p_bar
    q_floor = max(0.0, 1.0 - (1.0 - 100.0 * settings.singularity_epsilon) / beta)
    best = math.inf
    since_best = 0
    good_run = 0
    glob_best = math.inf
    since_glob = 0
    osc = 0
    prev_res = math.inf
    res = math.inf

    def failure(why: str, it: int) -> RSSolution:
        return RSSolution(alpha=alpha, beta=beta,
                          params=RSOrderParams(m=m, q=q, p_bar=pbar),
                          free_energy=math.nan, converged=False, iterations=it,
                          branch_label="none", residual=res, nodes=settings.quadrature_nodes,
                          init_label=init_label, diagnostic=why)

    for it in range(1, settings.max_iter + 1):
        try:
            rhs = self_consistency_rhs(RSOrderParams(m, q, pbar), alpha, beta, settings)
        except SingularSelfConsistencyError as err:
            return failure(str(err), it)
        m2, q2, p2 = rhs.m, rhs.q, rhs.p_bar
        res = max(abs(m2 - m), abs(q2 - q), abs(p2 - pbar) / max(1.0, abs(p2)))
        if res < settings.tol:
            final = RSOrderParams(m=m2, q=q2, p_bar=_selfp(q2, beta))
            return RSSolution(alpha=alpha, beta=beta, params=final,
                              free_energy=rs_free_energy(final, alpha, beta, settings.quadrature_nodes),
                              converged=True, iterations=it,
                              branch_label=_label(m2, q2, settings), residual=res,
                              nodes=settings.quadrature_nodes, init_label=init_label)
        if not (0.0 <= q2 <= 1.0) or not math.isfinite(m2) or not math.isfinite(p2):
            return failure(f"order parameters left their domain: m={m2!r} q={q2!r} p={p2!r}", it)

        # damping control watches the dynamical pair (m, q) only: the slaved
        # p_bar residual stays at a constant relative lag during geometric
        # decay and must not masquerade as stagnation
        res_mq = max(abs(m2 - m), abs(q2 - q))
        if res_mq < best * (1.0 - 1e-3):
            best, since_best, good_run = res_mq, 0, good_run + 1
        else:
            since_best += 1
            good_run = 0
        if res_mq < glob_best * (1.0 - 1e-4):
            glob_best, since_glob = res_mq, 0
        else:
            since_glob += 1
        osc = osc + 1 if res_mq >= prev_res else 0
        if osc >= 10 or since_best >= _STALL_WINDOW:
            lam = max(0.5 * lam, lam_min)
            osc, since_best, best = 0, 0, res_mq
        elif good_run >= _RECOVER_WINDOW:
            lam = min(2.0 * lam, lam0)
            good_run = 0
        if since_glob >= _GIVE_UP_WINDOW and lam <= lam_min * 1.0001:
            return failure("stagnated: no residual improvement at minimum damping", it)
        prev_res = res_mq

        m = (1.0 - lam) * m + lam * m2
        q = (1.0 - lam) * q + lam * q2
        pbar = p2
        if q < q_floor:
            q = q_floor
    return failure(f"max_iter={settings.max_iter} exhausted", settings.max_iter)


def canonical_inits(beta: float) -> list[tuple[str, RSOrderParams]]:
    """Paramagnet, spin-glass and retrieval starting points.

    The spin-glass start keeps 1 - beta(1-q) positive at any beta, hence
    q0 = max(0.9, 1 - 1/(2 beta)).
    """
    q_sg = max(0.9, 1.0 - 0.5 / beta)
    return [
        (BRANCH_PARAMAGNET, RSOrderParams(0.0, 0.0, 0.0)),
        (BRANCH_SPIN_GLASS, RSOrderParams(0.0, q_sg, _selfp(q_sg, beta))),
        (BRANCH_RETRIEVAL, RSOrderParams(1.0, 1.0, _selfp(1.0, beta))),
    ]


def enumerate_branches(alpha: float, beta: float,
                       settings: SolverSettings = SolverSettings()) -> list[RSSolution]:
    """All distinct converged branches from the canonical starts.

    Converged solutions closer than 1e-6 in every component are merged;
    the result is sorted by decreasing free energy, with non-converged
    starts appended at the end (reported, never silently dropped).
    """
    converged: list[RSSolution] = []
    failed: list[RSSolution] = []
    for name, init in canonical_inits(beta):
        sol = solve_fixed_point(alpha, beta, init, settings, init_label=name)
        if sol.converged:
            dup = any(
                max(abs(a - b) for a, b in zip(sol.params.as_tuple(), other.params.as_tuple())) < 1e-6
                for other in converged)
            if not dup:
                converged.append(sol)
        else:
            failed.append(sol)
    converged.sort(key=lambda s: s.free_energy, reverse=True)
    return converged + failed


# ----------------------------------------------------------------------
# general-k mixture mode: explicit average over all 2^k sign assignments
# ----------------------------------------------------------------------

_MIXTURE_K_CAP = 12


def _sign_assignments(k: int) -> np.ndarray:
    if k > _MIXTURE_K_CAP:
        raise ValueError(f"mixture mode supports k <= {_MIXTURE_K_CAP}")
    return np.array(list(itertools.product([1.0, -1.0], repeat=k)))


def mixture_rhs(m: np.ndarray, q: float, alpha: float, beta: float,
                settings: SolverSettings = SolverSettings()) -> tuple[np.ndarray, float, float]:
    """Stationarity map for a k-vector of condensed overlaps.

    The +-1 pattern average is carried out exactly over all 2^k
    assignments; the pure-state map is the k=1 special case.
    """
    m = np.asarray(m, dtype=np.float64)
    d = 1.0 - beta * (1.0 - q)
    if d <= settings.singularity_epsilon:
        raise SingularSelfConsistencyError(alpha, beta, q)
    p_new = _selfp(q, beta)
    s = math.sqrt(max(alpha * beta * p_new, 0.0))
    xs = _sign_assignments(m.shape[0])
    m_new = np.zeros_like(m)
    q_new = 0.0
    w = 1.0 / xs.shape[0]
    for row in xs:
        c = beta * float(row @ m)
        t1, t2 = mean_tanh_pair(c, s, settings.quadrature_nodes)
        m_new += w * t1 * row
        q_new += w * t2
    return m_new, q_new, p_new


def solve_mixture(alpha: float, beta: float, m0: np.ndarray, q0: float,
                  settings: SolverSettings = SolverSettings(),
                  ) -> tuple[np.ndarray, float, float, bool, int]:
    """Damped iteration of the mixture map; returns (m, q, p_bar, converged, iters)."""
    m = np.asarray(m0, dtype=np.float64).copy()
    q = q0
    pbar = _selfp(q0, beta)
    lam = settings.damping
    q_floor = max(0.0, 1.0 - (1.0 - 100.0 * settings.singularity_epsilon) / beta)
    for it in range(1, settings.max_iter + 1):
        m2, q2, p2 = mixture_rhs(m, q, alpha, beta, settings)
        res = max(float(np.max(np.abs(m2 - m))) if m.size else 0.0,
                  abs(q2 - q), abs(p2 - pbar) / max(1.0, abs(p2)))
        if res < settings.tol:
            return m2, q2, _selfp(q2, beta), True, it
        m = (1.0 - lam) * m + lam * m2
        q = max((1.0 - lam) * q + lam * q2, q_floor)
        pbar = (1.0 - lam) * pbar + lam * p2
    return m, q, pbar, False, settings.max_iter
