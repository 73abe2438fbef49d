"""Command-line interface.

Subcommands: verify-equivalence | solve | scan | mc | boundaries | replay.
Every command writes its data files plus a manifest into the output
directory (flag --out, else $HEBMIX_OUTDIR, else the working directory).

Exit codes: 0 success, 1 usage error, 2 numerical non-convergence or a
failed verification gate, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .backend import backend_name
from .exact import partition_ahn_exact, partition_rbm_quadrature
from .manifest import RunManifest
from .model import generate_patterns
from .montecarlo import McConfig, run_dynamics, trial_seeds
from .phase import (
    BoundaryCurve,
    boundaries_to_json,
    first_order_line,
    grid_to_csv,
    retrieval_existence_boundary,
    scan_grid,
    second_order_line_analytic,
    second_order_line_numeric,
)
from .rs import SolverSettings, enumerate_branches

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

EQUIVALENCE_GATE = 1e-8
MC_SCHEMA = "hebmix.mc.v1"
MC_COLUMNS = ["seed", "n", "k", "alpha", "beta", "sweeps",
              "m1_mean", "m1_err", "q12_mean", "q12_err", "energy_mean"]


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the contract here is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _solver_settings(cfg: dict) -> SolverSettings:
    return SolverSettings(quadrature_nodes=cfg.get("nodes", 64),
                          damping=cfg.get("damping", 0.5),
                          tol=cfg.get("tol", 1e-12),
                          max_iter=cfg.get("max_iter", 200_000))


# finite-beta solver only: large beta stands in for the zero-temperature limit
T0_PROXY_BETA = 50.0
T0_NOTE = ("beta >= 50 is treated as a zero-temperature proxy; "
           "no analytic T=0 equations are implemented")


def _t0_note(*betas: float) -> list[str]:
    return [T0_NOTE] if any(b >= T0_PROXY_BETA for b in betas) else []


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


# ----------------------------------------------------------------------
# command bodies: config dict in, (payload, files {name: text}) out
# ----------------------------------------------------------------------

def _run_verify_equivalence(cfg: dict):
    n, p, k = cfg["n"], cfg["p"], cfg.get("k", 0)
    seeds = [cfg["seed"] + i for i in range(cfg["trials"])]
    rows = []
    worst_abs = 0.0
    worst_rel = 0.0
    for s in seeds:
        pats = generate_patterns(n, k, p, s)
        ahn = partition_ahn_exact(pats, cfg["beta"])
        rbm = partition_rbm_quadrature(pats, cfg["beta"], nodes=cfg.get("nodes", 96))
        diff = abs(ahn.log_z - rbm.log_z)
        rel = diff / max(1.0, abs(ahn.log_z))
        worst_abs = max(worst_abs, diff)
        worst_rel = max(worst_rel, rel)
        rows.append({"seed": s, "log_z_enumeration": ahn.log_z,
                     "log_z_quadrature": rbm.log_z, "abs_diff": diff, "rel_diff": rel})
    passed = worst_abs < EQUIVALENCE_GATE
    payload = {"schema": "hebmix.equivalence.v1", "config": cfg,
               "max_abs_diff": worst_abs, "max_rel_diff": worst_rel,
               "gate": EQUIVALENCE_GATE, "passed": passed, "trials": rows}
    text = json.dumps(payload, indent=2) + "\n"
    return (EXIT_OK if passed else EXIT_NUMERICAL), payload, {"equivalence.json": text}


def _run_solve(cfg: dict):
    settings = _solver_settings(cfg)
    alpha_eff = cfg["alpha"] + cfg.get("gamma", 0.0)
    sols = enumerate_branches(alpha_eff, cfg["beta"], settings)
    records = [s.to_record() for s in sols if s.converged]
    failures = [{"init": s.init_label, "diagnostic": s.diagnostic} for s in sols if not s.converged]
    payload = {"schema": "hebmix.solve.v1",
               "inputs": {"alpha": cfg["alpha"], "gamma": cfg.get("gamma", 0.0),
                          "beta": cfg["beta"], "nodes": settings.quadrature_nodes,
                          "damping": settings.damping, "tol": settings.tol,
                          "max_iter": settings.max_iter},
               "alpha_effective": alpha_eff,
               "ordering": "preferred branch maximizes the pressure A",
               "notes": _t0_note(cfg["beta"]),
               "solutions": records, "failed_starts": failures}
    text = json.dumps(payload, indent=2) + "\n"
    code = EXIT_OK if records else EXIT_NUMERICAL
    return code, payload, {"solutions.json": text}


def _run_scan(cfg: dict):
    settings = _solver_settings(cfg)
    points = scan_grid((cfg["alpha_min"], cfg["alpha_max"]),
                       (cfg["beta_min"], cfg["beta_max"]),
                       (cfg["resolution_alpha"], cfg["resolution_beta"]),
                       settings, gamma=cfg.get("gamma", 0.0),
                       jobs=cfg.get("jobs", 1))
    payload = {"points": len(points)}
    return EXIT_OK, payload, {"grid.csv": grid_to_csv(points)}


def _mc_trial(args):
    cfg_dict, seed = args
    mc_cfg = McConfig(n=cfg_dict["n"], alpha=cfg_dict["alpha"], k=cfg_dict["k"],
                      beta=cfg_dict["beta"], sweeps=cfg_dict["sweeps"], seed=seed,
                      thermalization_fraction=cfg_dict.get("therm_frac", 0.5),
                      init=cfg_dict.get("init", "pattern"),
                      init_pattern=cfg_dict.get("init_pattern", 1),
                      n_replicas=cfg_dict.get("replicas", 1),
                      rule=cfg_dict.get("rule", "glauber"))
    disorder_seed, _ = trial_seeds(seed, mc_cfg.n_replicas)
    patterns = generate_patterns(mc_cfg.n, mc_cfg.k, mc_cfg.p, disorder_seed)
    res = run_dynamics(mc_cfg, patterns)
    return {"seed": seed, "n": mc_cfg.n, "k": mc_cfg.k, "alpha": mc_cfg.alpha,
            "beta": mc_cfg.beta, "sweeps": mc_cfg.sweeps,
            "m1_mean": float(res.mattis_mean[0]) if mc_cfg.k else None,
            "m1_err": float(res.mattis_err[0]) if mc_cfg.k else None,
            "q12_mean": res.q12_mean, "q12_err": res.q12_err,
            "energy_mean": res.energy_mean}


def _run_mc(cfg: dict):
    seeds = [cfg["seed"] + i for i in range(cfg.get("trials", 1))]
    tasks = [(cfg, s) for s in seeds]
    jobs = cfg.get("jobs", 1)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_mc_trial, tasks))
    else:
        rows = [_mc_trial(t) for t in tasks]
    buf = io.StringIO()
    buf.write(f"# schema={MC_SCHEMA}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MC_COLUMNS)
    for r in rows:
        writer.writerow([r["seed"], r["n"], r["k"], _fmt(r["alpha"]), _fmt(r["beta"]),
                         r["sweeps"], _fmt(r["m1_mean"]), _fmt(r["m1_err"]),
                         _fmt(r["q12_mean"]), _fmt(r["q12_err"]), _fmt(r["energy_mean"])])
    payload = {"trials": rows}
    return EXIT_OK, payload, {"mc.csv": buf.getvalue()}


def _run_boundaries(cfg: dict):
    settings = _solver_settings(cfg)
    which = cfg.get("which", ["second-order", "existence", "first-order"])
    curves: list[BoundaryCurve] = []
    if "second-order" in which:
        pts = []
        for a in cfg["alphas"]:
            beta_c = (second_order_line_numeric(a, settings)
                      if cfg.get("numeric", True) else second_order_line_analytic(a))
            pts.append((a, beta_c))
        curves.append(BoundaryCurve(kind="second-order", points=tuple(pts), tolerance=1e-4))
    if "existence" in which:
        pts = [(retrieval_existence_boundary(b, settings), b) for b in cfg["betas"]]
        curves.append(BoundaryCurve(kind="existence",
                                    points=tuple(sorted(pts)), tolerance=1e-3))
    if "first-order" in which:
        pts = [(first_order_line(b, settings), b) for b in cfg["betas"]]
        curves.append(BoundaryCurve(kind="first-order",
                                    points=tuple(sorted(pts)), tolerance=1e-3))
    payload = {"curves": [c.kind for c in curves],
               "notes": _t0_note(*cfg.get("betas", []))}
    return EXIT_OK, payload, {"boundaries.json": boundaries_to_json(curves)}


_COMMANDS = {
    "verify-equivalence": _run_verify_equivalence,
    "solve": _run_solve,
    "scan": _run_scan,
    "mc": _run_mc,
    "boundaries": _run_boundaries,
}


def _execute(command: str, cfg: dict, out_dir: Path, quiet: bool = False) -> int:
    cfg = dict(sorted(cfg.items()))  # canonical key order so replays match byte-wise
    try:
        code, payload, files = _COMMANDS[command](cfg)
    except (ValueError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (out_dir / name).write_text(text)
        manifest = RunManifest.create(command=command, config=cfg,
                                      seed=cfg.get("seed"), tool_version=__version__,
                                      backend=backend_name(),
                                      output_paths=sorted(files))
        manifest.write(out_dir / f"manifest-{command}.json")
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    if not quiet:
        if command == "solve":
            print(json.dumps(payload, indent=2))
        else:
            summary = {"command": command, "exit": code, "outputs": sorted(files)}
            if command == "verify-equivalence":
                summary["max_abs_diff"] = payload["max_abs_diff"]
                summary["passed"] = payload["passed"]
            print(json.dumps(summary, indent=2))
    return code


def _run_replay(manifest_path: str, out_dir: Path, quiet: bool) -> int:
    try:
        manifest = RunManifest.read(manifest_path)
    except (OSError, ValueError, KeyError) as err:
        print(f"error: cannot read manifest: {err}", file=sys.stderr)
        return EXIT_IO
    if manifest.backend != backend_name():
        print(f"error: manifest was produced with backend {manifest.backend!r} "
              f"but the active backend is {backend_name()!r}; set HEBMIX_BACKEND to replay",
              file=sys.stderr)
        return EXIT_USAGE
    return _execute(manifest.command, manifest.config, out_dir, quiet=quiet)


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------

def _floats(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _apply_config_file(args: argparse.Namespace, argv: list[str]) -> None:
    """Fill parameters from a KEY=VALUE file; explicit flags win.

    Keys are the long option names without dashes (e.g. ``alpha-min``).
    Values are coerced to the type of the parsed default.
    """
    text = Path(args.config).read_text()
    explicit = {tok.split("=", 1)[0] for tok in argv if tok.startswith("--")}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{args.config}:{lineno}: expected KEY=VALUE, got {raw!r}")
        key, value = (tok.strip() for tok in line.split("=", 1))
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise ValueError(f"{args.config}:{lineno}: unknown parameter {key!r}")
        if f"--{key}" in explicit:
            continue
        current = getattr(args, dest)
        if isinstance(current, bool):
            parsed = value.lower() in ("1", "true", "yes", "on")
        elif isinstance(current, int):
            parsed = int(value)
        elif isinstance(current, float):
            parsed = float(value)
        elif isinstance(current, list):
            parsed = _floats(value) if current and isinstance(current[0], float) \
                else [tok for tok in value.split(",") if tok]
        else:
            parsed = value
        setattr(args, dest, parsed)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hebmix",
                     description="Mixed Boolean/Gaussian Hebbian network toolkit")
    parser.add_argument("--version", action="version", version=f"hebmix {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", default=None,
                       help="output directory (default $HEBMIX_OUTDIR or '.')")
        p.add_argument("--config", default=None,
                       help="KEY=VALUE parameter file; explicit flags override it")
        p.add_argument("--quiet", action="store_true")

    def add_solver_flags(p):
        p.add_argument("--nodes", type=int, default=64)
        p.add_argument("--damping", type=float, default=0.5)
        p.add_argument("--tol", type=float, default=1e-12)
        p.add_argument("--max-iter", type=int, default=200_000, dest="max_iter")

    p = sub.add_parser("verify-equivalence",
                       help="enumeration vs hidden-unit quadrature on random disorders")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nodes", type=int, default=96)
    add_out(p)

    p = sub.add_parser("solve", help="replica-symmetric branches at one (alpha, beta)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.0,
                   help="extensive Boolean load; shifts alpha -> alpha + gamma")
    add_solver_flags(p)
    add_out(p)

    p = sub.add_parser("scan", help="classify an (alpha, beta) grid")
    p.add_argument("--alpha-min", type=float, default=0.0)
    p.add_argument("--alpha-max", type=float, default=0.2)
    p.add_argument("--beta-min", type=float, default=0.5)
    p.add_argument("--beta-max", type=float, default=5.0)
    p.add_argument("--resolution", type=int, default=20)
    p.add_argument("--resolution-beta", type=int, default=None)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--jobs", type=int, default=1)
    add_solver_flags(p)
    add_out(p)

    p = sub.add_parser("mc", help="Monte Carlo trials of the mixed network")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--sweeps", type=int, default=2000)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--replicas", type=int, default=1, choices=(1, 2))
    p.add_argument("--init", default="pattern", choices=("pattern", "random", "all-up"))
    p.add_argument("--init-pattern", type=int, default=1, dest="init_pattern")
    p.add_argument("--therm-frac", type=float, default=0.5, dest="therm_frac")
    p.add_argument("--rule", default="glauber", choices=("glauber", "metropolis"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    add_out(p)

    p = sub.add_parser("boundaries", help="phase boundary curves")
    p.add_argument("--alphas", type=_floats, default=[0.01, 0.05, 0.1, 0.2, 0.5, 1.0],
                   help="comma-separated alphas for the second-order line")
    p.add_argument("--betas", type=_floats, default=[1.5, 2.0, 3.0, 5.0],
                   help="comma-separated betas for the existence/first-order lines")
    p.add_argument("--which", type=lambda s: s.split(","),
                   default=["second-order", "existence", "first-order"])
    p.add_argument("--analytic-only", action="store_false", dest="numeric",
                   help="use the closed-form second-order line instead of bisection")
    add_solver_flags(p)
    add_out(p)

    p = sub.add_parser("replay", help="re-run a recorded manifest")
    p.add_argument("manifest")
    add_out(p)

    return parser


_CONFIG_KEYS = {
    "verify-equivalence": ["n", "p", "k", "beta", "trials", "seed", "nodes"],
    "solve": ["alpha", "beta", "gamma", "nodes", "damping", "tol", "max_iter"],
    "scan": ["alpha_min", "alpha_max", "beta_min", "beta_max", "gamma", "jobs",
             "nodes", "damping", "tol", "max_iter"],
    "mc": ["n", "alpha", "k", "beta", "sweeps", "trials", "replicas", "init",
           "init_pattern", "therm_frac", "rule", "seed", "jobs"],
    "boundaries": ["alphas", "betas", "which", "numeric",
                   "nodes", "damping", "tol", "max_iter"],
}


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out if args.out else os.environ.get("HEBMIX_OUTDIR", "."))
    if args.command == "replay":
        return _run_replay(args.manifest, out_dir, quiet=args.quiet)
    if args.config:
        try:
            _apply_config_file(args, argv)
        except (OSError, ValueError) as err:
            print(f"error: bad config file: {err}", file=sys.stderr)
            return EXIT_USAGE
    cfg = {key: getattr(args, key) for key in _CONFIG_KEYS[args.command]}
    if args.command == "scan":
        cfg["resolution_alpha"] = args.resolution
        cfg["resolution_beta"] = args.resolution_beta or args.resolution
    return _execute(args.command, cfg, out_dir, quiet=args.quiet)


if __name__ == "__main__":
    raise SystemExit(main())
