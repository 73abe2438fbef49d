"""Phase boundaries and (alpha, beta) grid classification.

Three boundaries are computed:

* second-order ergodicity-breaking line, analytically beta = 1/(1+sqrt(alpha))
  and numerically as the onset of q > 0 on the zero-magnetization branch;
* retrieval existence line (spinodal): largest alpha at fixed beta for which
  the solver still finds a retrieval branch;
* first-order line: free-energy balance between the retrieval and
  spin-glass branches.

Ordering convention: the pressure A = (1/N) E ln Z is reported, so the
thermodynamically preferred branch is the one with LARGER A.  Every output
record states this convention.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .rs import (
    BRANCH_PARAMAGNET,
    BRANCH_RETRIEVAL,
    BRANCH_SPIN_GLASS,
    RSSolution,
    SolverSettings,
    canonical_inits,
    enumerate_branches,
    solve_fixed_point,
)

GRID_SCHEMA = "hebmix.grid.v1"
BOUNDARY_SCHEMA = "hebmix.boundary.v1"
ORDERING_NOTE = "preferred branch maximizes the pressure A"

PHASE_PARAMAGNET = "paramagnet"
PHASE_SPIN_GLASS = "spin-glass"
PHASE_RETRIEVAL_STABLE = "retrieval-stable"
PHASE_RETRIEVAL_META = "retrieval-metastable"
PHASE_ERROR = "error"


class BracketError(RuntimeError):
    """A bisection bracket could not be established."""


@dataclass(frozen=True)
class PhasePoint:
    alpha: float
    beta: float
    gamma: float
    branches: tuple[RSSolution, ...]
    phase: str

    def best(self, label: str) -> RSSolution | None:
        cands = [b for b in self.branches if b.converged and b.branch_label == label]
        return max(cands, key=lambda s: s.free_energy) if cands else None

    def dominant(self) -> RSSolution | None:
        cands = [b for b in self.branches if b.converged]
        return max(cands, key=lambda s: s.free_energy) if cands else None


@dataclass(frozen=True)
class BoundaryCurve:
    kind: str  # "second-order" | "existence" | "first-order"
    points: tuple[tuple[float, float], ...]  # (alpha, beta), sorted by alpha
    tolerance: float

    def to_json_dict(self) -> dict:
        return {"schema": BOUNDARY_SCHEMA, "kind": self.kind,
                "tolerance": self.tolerance, "ordering": ORDERING_NOTE,
                "points": [{"alpha": a, "beta": b} for a, b in self.points]}


def second_order_line_analytic(alpha: float) -> float:
    """Ergodicity-breaking temperature: beta_c = 1 / (1 + sqrt(alpha))."""
    if alpha < 0.0:
        raise ValueError("alpha must be >= 0")
    return 1.0 / (1.0 + math.sqrt(alpha))


def _q_star(alpha: float, beta: float, settings: SolverSettings) -> float:
    """Converged q on the m=0 branch, used as the onset indicator.

    The decay toward q = 0 is monotone from above, so a non-converged run
    that has already fallen below the onset is safely classified 'below'.
    """
    probe = replace(settings, tol=max(settings.tol, 1e-10), max_iter=min(settings.max_iter, 60_000))
    name, init = canonical_inits(beta)[1]
    sol = solve_fixed_point(alpha, beta, init, probe, init_label=name)
    return sol.params.q


def second_order_line_numeric(alpha: float, settings: SolverSettings = SolverSettings(),
                              q_onset: float = 1e-6, width: float = 1e-4,
                              bracket: tuple[float, float] = (0.02, 0.9999)) -> float:
    """Numeric onset of q > 0, bisected in beta to the requested width."""
    if alpha <= 0.0:
        raise ValueError("alpha must be > 0 for the numeric line")

    def above(beta: float) -> bool:
        return _q_star(alpha, beta, settings) > q_onset

    lo, hi = bracket
    if above(lo) or not above(hi):
        lo, hi = 0.25 * lo, 0.5 * (hi + 1.0)  # one widening, then give up
        if above(lo) or not above(hi):
            raise BracketError(
                f"no q-onset bracket in beta within [{lo}, {hi}] at alpha={alpha}")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if above(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _retrieval_solution(alpha: float, beta: float,
                        settings: SolverSettings) -> RSSolution | None:
    name, init = canonical_inits(beta)[2]
    sol = solve_fixed_point(alpha, beta, init, settings, init_label=name)
    if sol.converged and sol.branch_label == BRANCH_RETRIEVAL:
        return sol
    return None


def _spin_glass_solution(alpha: float, beta: float,
                         settings: SolverSettings) -> RSSolution | None:
    name, init = canonical_inits(beta)[1]
    sol = solve_fixed_point(alpha, beta, init, settings, init_label=name)
    if sol.converged and abs(sol.params.m) <= settings.m_threshold:
        return sol
    return None


def retrieval_existence_boundary(beta: float, settings: SolverSettings = SolverSettings(),
                                 width: float = 1e-3,
                                 bracket: tuple[float, float] = (1e-4, 0.5)) -> float:
    """Largest alpha with a converged retrieval branch at this beta (spinodal)."""
    if beta <= 1.0:
        raise ValueError("retrieval requires beta > 1")
    lo, hi = bracket

    def exists(alpha: float) -> bool:
        return _retrieval_solution(alpha, beta, settings) is not None

    if not exists(lo):
        lo = 0.1 * lo
        if not exists(lo):
            raise BracketError(
                f"no retrieval branch even at alpha={lo} (beta={beta} too small or solver misconfigured)")
    if exists(hi):
        hi = 2.0 * hi
        if exists(hi):
            raise BracketError(f"retrieval branch persists to alpha={hi} at beta={beta}")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if exists(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def first_order_line(beta: float, settings: SolverSettings = SolverSettings(),
                     width: float = 1e-3) -> float:
    """alpha where the retrieval and spin-glass pressures balance.

    Below the crossing the retrieval branch dominates (larger A); the
    returned alpha is always below the existence boundary.
    """
    alpha_max = retrieval_existence_boundary(beta, settings, width=width)

    def delta_a(alpha: float) -> float | None:
        ret = _retrieval_solution(alpha, beta, settings)
        sg = _spin_glass_solution(alpha, beta, settings)
        if ret is None or sg is None:
            return None
        return ret.free_energy - sg.free_energy

    lo = max(0.25 * width, 0.01)
    d_lo = delta_a(lo)
    if d_lo is None or d_lo <= 0.0:
        lo = 0.1 * lo
        d_lo = delta_a(lo)
        if d_lo is None or d_lo <= 0.0:
            raise BracketError(f"retrieval never dominates near alpha={lo} at beta={beta}")
    hi = alpha_max - 0.5 * width
    d_hi = delta_a(hi)
    if d_hi is None or d_hi >= 0.0:
        raise BracketError(
            f"branches do not coexist with a sign change up to alpha={hi} at beta={beta}")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        d_mid = delta_a(mid)
        if d_mid is None:
            raise BracketError(f"branch lost during bisection at alpha={mid}, beta={beta}")
        if d_mid > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def classify_point(alpha: float, beta: float, settings: SolverSettings = SolverSettings(),
                   gamma: float = 0.0) -> PhasePoint:
    """Solve all branches at alpha + gamma and classify the phase.

    retrieval-stable requires the retrieval branch to win (or tie) the
    pressure comparison against the best zero-magnetization branch.
    """
    try:
        branches = tuple(enumerate_branches(alpha + gamma, beta, settings))
    except Exception as err:  # per-point failures recorded, scan continues
        return PhasePoint(alpha=alpha, beta=beta, gamma=gamma, branches=(),
                          phase=f"{PHASE_ERROR}: {err}")
    point = PhasePoint(alpha=alpha, beta=beta, gamma=gamma, branches=branches, phase="")
    ret = point.best(BRANCH_RETRIEVAL)
    sg = point.best(BRANCH_SPIN_GLASS)
    para = point.best(BRANCH_PARAMAGNET)
    zero_m = sg if sg is not None else para
    if ret is not None:
        if zero_m is None or ret.free_energy >= zero_m.free_energy:
            phase = PHASE_RETRIEVAL_STABLE
        else:
            phase = PHASE_RETRIEVAL_META
    elif sg is not None:
        phase = PHASE_SPIN_GLASS
    else:
        phase = PHASE_PARAMAGNET
    return replace(point, phase=phase)


def conjecture_shift(alpha: float, gamma: float, beta: float,
                     settings: SolverSettings = SolverSettings()) -> list[RSSolution]:
    """Branches when both pattern species are extensive: the load simply
    shifts alpha -> alpha + gamma (identical code path by construction)."""
    if alpha < 0.0 or gamma < 0.0:
        raise ValueError("alpha and gamma must be >= 0")
    return enumerate_branches(alpha + gamma, beta, settings)


def _classify_star(args) -> PhasePoint:
    return classify_point(*args)


def scan_grid(alpha_range: tuple[float, float], beta_range: tuple[float, float],
              resolution: int | tuple[int, int],
              settings: SolverSettings = SolverSettings(),
              gamma: float = 0.0, jobs: int = 1) -> list[PhasePoint]:
    """Classify every point of a rectangular grid; row-major in (alpha, beta)."""
    na, nb = (resolution, resolution) if isinstance(resolution, int) else resolution
    if na < 1 or nb < 1:
        raise ValueError("resolution must be positive")
    alphas = np.linspace(alpha_range[0], alpha_range[1], na)
    betas = np.linspace(beta_range[0], beta_range[1], nb)
    tasks = [(float(a), float(b), settings, gamma) for a in alphas for b in betas]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_classify_star, tasks, chunksize=4))
    return [classify_point(*t) for t in tasks]


# ----------------------------------------------------------------------
# serialization
# ----------------------------------------------------------------------

GRID_COLUMNS = ["alpha", "beta", "gamma", "phase", "m", "q", "p_bar",
                "A_retrieval", "A_spinglass"]


def _fmt(x: float | None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def grid_to_csv(points: list[PhasePoint]) -> str:
    """CSV with a schema comment line; floats use round-trip precision."""
    buf = io.StringIO()
    buf.write(f"# schema={GRID_SCHEMA} ordering={ORDERING_NOTE.replace(' ', '_')}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(GRID_COLUMNS)
    for pt in points:
        dom = pt.dominant()
        ret = pt.best(BRANCH_RETRIEVAL)
        sg = pt.best(BRANCH_SPIN_GLASS)
        para = pt.best(BRANCH_PARAMAGNET)
        zero_m = sg if sg is not None else para
        writer.writerow([
            _fmt(pt.alpha), _fmt(pt.beta), _fmt(pt.gamma), pt.phase,
            _fmt(dom.params.m if dom else None),
            _fmt(dom.params.q if dom else None),
            _fmt(dom.params.p_bar if dom else None),
            _fmt(ret.free_energy if ret else None),
            _fmt(zero_m.free_energy if zero_m else None),
        ])
    return buf.getvalue()


def boundaries_to_json(curves: list[BoundaryCurve]) -> str:
    return json.dumps({"schema": BOUNDARY_SCHEMA, "ordering": ORDERING_NOTE,
                       "curves": [c.to_json_dict() for c in curves]}, indent=2) + "\n"
