"""Command-line harness: ``dampedbo {birkhoff,evolve,pde,compare,diagnose,sweep}``.

Exit codes: 0 success, 1 usage or configuration error, 2 engine error,
3 failed acceptance check (compare, diagnose).
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .birkhoff import birkhoff_forward
from .core import ConfigError, InvalidInputError, RunConfig, initial_function
from .diagnostics import diagnose
from .integrator import Trajectory, evolve
from .pde import cross_validate, pde_evolve

EXIT_OK, EXIT_USAGE, EXIT_ENGINE, EXIT_CHECK = 0, 1, 2, 3
COMPARE_THRESHOLD = 1e-4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunRecord:
    """Bookkeeping for one run directory."""

    run_id: str
    config: dict
    engine: str = "birkhoff"
    paths: dict = field(default_factory=dict)
    status: str = "pending"
    wall_time: float = 0.0
    error: str | None = None

    def to_dict(self):
        return {
            "id": self.run_id, "engine": self.engine, "config": self.config, "paths": self.paths,
            "status": self.status, "wall_time": self.wall_time, "error": self.error,
        }


def run_id(config, engine="birkhoff"):
    """Content hash of the engine name and the canonical config JSON."""
    text = engine + ":" + config.canonical_json()
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)


def _write_manifest(out, names):
    files = {n: _sha256(out / n) for n in names}
    _write_json(out / "manifest.json", {"files": files})


def _load_config(path, seed=None):
    if path is None:
        raise UsageError("--config is required")
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise UsageError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from exc
    return _apply_seed(RunConfig.from_dict(raw), seed)


def _apply_seed(cfg, seed):
    if seed is not None and cfg.initial_data.get("kind") == "random":
        cfg = replace(cfg, initial_data={**cfg.initial_data, "seed": int(seed)})
    return cfg


def _u0(cfg, config_path):
    base = Path(config_path).parent if config_path else None
    return initial_function(cfg, base)


def _run_dir(cfg, out, engine):
    d = Path(out) / run_id(cfg, engine)
    d.mkdir(parents=True, exist_ok=True)
    return d


def execute_run(cfg, out, engine="birkhoff", base_dir=None):
    """Run one configuration into ``out/<run id>`` and return its RunRecord."""
    rec = RunRecord(run_id(cfg, engine), cfg.to_dict(), engine=engine)
    d = _run_dir(cfg, out, engine)
    t0 = time.perf_counter()
    _write_json(d / "config.json", cfg.to_dict())
    u0 = initial_function(cfg, base_dir)
    if engine == "birkhoff":
        state, _ = birkhoff_forward(u0, cfg.N, cfg.lax_cut)
        traj = evolve(state, cfg)
    else:
        traj = pde_evolve(u0, cfg)
    traj.to_csv(d / "trajectory.csv")
    report = diagnose(traj)
    report.to_json(d / "diagnostics.json")
    _write_manifest(d, ["config.json", "trajectory.csv", "diagnostics.json"])
    rec.paths = {n: str(d / n) for n in ("config.json", "trajectory.csv", "diagnostics.json", "manifest.json")}
    rec.status = "completed"
    rec.wall_time = time.perf_counter() - t0
    _write_json(d / "record.json", rec.to_dict())
    return rec, report


def cmd_birkhoff(args):
    cfg = _load_config(args.config, args.seed)
    u0 = _u0(cfg, args.config)
    state, spec = birkhoff_forward(u0, cfg.N, cfg.lax_cut)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec.dump(out / "spectrum.json")
    lines = [f"{'n':>4} {'gamma_n':>14} {'lambda_n':>14} {'kappa_n':>14}"]
    lam, kap = spec.lam, spec.kappa
    lines.append(f"{0:>4} {1.0:>14.6e} {lam[0]:>14.8f} {kap[0]:>14.8f}")
    for n in range(1, cfg.N + 1):
        lines.append(f"{n:>4} {state.gamma[n - 1]:>14.6e} {lam[n]:>14.8f} {kap[n]:>14.8f}")
    table = "\n".join(lines)
    (out / "spectrum.txt").write_text(table + "\n")
    if not args.quiet:
        print(table)
    return EXIT_OK


def _single(args, engine):
    cfg = _load_config(args.config, args.seed)
    base = Path(args.config).parent
    rec, report = execute_run(cfg, args.out, engine, base)
    if not args.quiet:
        print(f"run {rec.run_id} -> {Path(args.out) / rec.run_id}")
        print(report.summary())
    return EXIT_OK


def cmd_evolve(args):
    return _single(args, "birkhoff")


def cmd_pde(args):
    return _single(args, "pde")


def cmd_compare(args):
    cfg = _load_config(args.config, args.seed)
    u0 = _u0(cfg, args.config)
    rep = cross_validate(u0, cfg)
    rep["threshold"] = COMPARE_THRESHOLD
    rep["passed"] = rep["max_action_discrepancy"] <= COMPARE_THRESHOLD
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "compare.json", rep)
    if not args.quiet:
        tag = "pass" if rep["passed"] else "FAIL"
        print(f"{tag}  max action discrepancy {rep['max_action_discrepancy']:.3e}"
              f" (n <= {rep['compared_modes']}, threshold {COMPARE_THRESHOLD:.0e})")
        print(f"      max zeta discrepancy   {rep['max_zeta_discrepancy']:.3e}")
    return EXIT_OK if rep["passed"] else EXIT_CHECK


def cmd_diagnose(args):
    run = Path(args.run_dir)
    if not (run / "config.json").exists() or not (run / "trajectory.csv").exists():
        raise UsageError(f"{run} is not a run directory")
    cfg = RunConfig.load(run / "config.json")
    traj = Trajectory.from_csv(run / "trajectory.csv", cfg)
    report = diagnose(traj)
    report.provenance["run_dir"] = str(run)
    report.to_json(run / "diagnostics.json")
    if not args.quiet:
        print(report.summary())
    return EXIT_OK if report.passed else EXIT_CHECK


def _sweep_one(payload):
    cfg_dict, out, engine, base = payload
    cfg = RunConfig.from_dict(cfg_dict)
    try:
        rec, _ = execute_run(cfg, out, engine, base)
    except Exception as exc:  # a failed run must not abort its siblings
        rec = RunRecord(
            run_id(cfg, engine), cfg.to_dict(), engine=engine, status="failed", error=repr(exc)
        )
    return rec.to_dict()


def sweep_configs(sweep, seed=None):
    """Expand ``{"template": {...}, "grid": {"alpha": [...], "r": [...]}}`` into configs."""
    template = dict(sweep.get("template", {}))
    grid = sweep.get("grid", {})
    keys = sorted(grid)
    out = []
    for values in itertools.product(*(grid[k] for k in keys)):
        d = json.loads(json.dumps(template))
        for k, v in zip(keys, values):
            if k == "r":
                d["initial_data"] = {"kind": "one-gap", "r": v}
            else:
                d[k] = v
        out.append(_apply_seed(RunConfig.from_dict(d), seed))
    return out


def cmd_sweep(args):
    if args.config is None:
        raise UsageError("--config is required")
    with open(args.config) as fh:
        sweep = json.load(fh)
    engine = sweep.get("engine", "birkhoff")
    if engine not in ("birkhoff", "pde"):
        raise ConfigError([f"engine must be 'birkhoff' or 'pde' (got {engine!r})"])
    cfgs = sweep_configs(sweep, args.seed)
    base = str(Path(args.config).parent)
    payloads = [(c.to_dict(), args.out, engine, base) for c in cfgs]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            records = list(pool.map(_sweep_one, payloads))
    else:
        records = [_sweep_one(p) for p in payloads]
    Path(args.out).mkdir(parents=True, exist_ok=True)
    _write_json(Path(args.out) / "sweep.json", {"runs": records})
    failed = [r for r in records if r["status"] != "completed"]
    if not args.quiet:
        print(f"{len(records) - len(failed)}/{len(records)} runs completed")
        for r in failed:
            print(f"failed {r['id']}: {r['error']}")
    return EXIT_ENGINE if failed else EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", default="runs", help="output directory")
    common.add_argument("--workers", type=int, default=1, help="parallel runs (sweep)")
    common.add_argument("--seed", type=int, help="seed for random initial data")
    common.add_argument("--quiet", action="store_true")
    p = _Parser(prog="dampedbo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("birkhoff", parents=[common], help="direct Birkhoff map of u0")
    sub.add_parser("evolve", parents=[common], help="evolve in Birkhoff coordinates")
    sub.add_parser("pde", parents=[common], help="evolve the PDE pseudospectrally")
    sub.add_parser("compare", parents=[common], help="cross-validate both engines")
    d = sub.add_parser("diagnose", parents=[common], help="re-run diagnostics on a run directory")
    d.add_argument("run_dir")
    sub.add_parser("sweep", parents=[common], help="grid of runs over alpha and r")
    return p


COMMANDS = {
    "birkhoff": cmd_birkhoff, "evolve": cmd_evolve, "pde": cmd_pde,
    "compare": cmd_compare, "diagnose": cmd_diagnose, "sweep": cmd_sweep,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, RuntimeError, InvalidInputError, OSError, ValueError) as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE


if __name__ == "__main__":
    sys.exit(main())
