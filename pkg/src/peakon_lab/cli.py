"""Command-line runner: ``peakon-lab run`` and ``peakon-lab list-scenarios``.

Artifacts written to the output directory:

trajectory.csv   t, x1..xN, p1..pN  (17 significant digits)
invariants.csv   t, P, H, H1, H2, H3
report.json      every diagnostic report (series, margins, metadata)
summary.json     schema_version, scenario, config, named margins, overall pass flag

Exit codes: 0 all margins pass, 1 some margin fails, 2 bad config or usage,
3 runtime failure inside the scenario.  Nothing is written unless the
scenario completes.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import shutil
import sys
import tempfile

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .dynamics import invariants
from .greens import CHKernel
from .scenarios import SCENARIOS, ScenarioResult, resolve, run_scenario, scenario_names

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def trajectory_csv(result: ScenarioResult, snapshots: int) -> str:
    traj = result.trajectory
    states = traj.states() if snapshots == 0 else traj.sample(np.linspace(traj.t0, traj.t1, snapshots))
    n = traj.n
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"x{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)])
    for s in states:
        w.writerow([_fmt(s.t)] + [_fmt(v) for v in s.x] + [_fmt(v) for v in s.p])
    return buf.getvalue()


def invariants_csv(result: ScenarioResult, alpha: float, snapshots: int) -> str:
    traj = result.trajectory
    kernel = CHKernel(alpha)
    states = traj.states() if snapshots == 0 else traj.sample(np.linspace(traj.t0, traj.t1, snapshots))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "P", "H", "H1", "H2", "H3"])
    for s in states:
        inv = invariants(kernel, s)
        w.writerow([_fmt(v) for v in (s.t, inv.P, inv.H, *inv.Hn)])
    return buf.getvalue()


def _clean(obj):
    # json cannot encode numpy scalars or non-finite floats portably
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    return obj


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def summary_dict(cfg: RunConfig, result: ScenarioResult) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "scenario": cfg.scenario,
        "config": cfg.to_dict(),
        "margins": {
            m.name: {"value": m.value, "tolerance": m.tolerance, "strict": m.strict, "passed": m.passed}
            for m in result.margins
        },
        "failed": [m.name for m in result.margins if not m.passed],
        "passed": result.passed,
        "info": result.info,
    }


def render_artifacts(cfg: RunConfig, result: ScenarioResult) -> dict[str, str]:
    files = {}
    if "csv" in cfg.formats and result.trajectory is not None:
        files["trajectory.csv"] = trajectory_csv(result, cfg.snapshots)
        files["invariants.csv"] = invariants_csv(result, cfg.alpha, cfg.snapshots)
    if "json" in cfg.formats:
        files["report.json"] = _dumps({k: r.to_dict() for k, r in result.reports.items()})
    files["summary.json"] = _dumps(summary_dict(cfg, result))
    return files


def write_atomic(out_dir: str, files: dict[str, str]):
    """Stage every file in a sibling temp dir, then move them into place."""
    out_dir = os.path.abspath(out_dir)
    parent = os.path.dirname(out_dir)
    os.makedirs(parent, exist_ok=True)
    stage = tempfile.mkdtemp(prefix=".peakon-lab-", dir=parent)
    try:
        for name, text in files.items():
            with open(os.path.join(stage, name), "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        os.makedirs(out_dir, exist_ok=True)
        for name in files:
            os.replace(os.path.join(stage, name), os.path.join(out_dir, name))
    finally:
        shutil.rmtree(stage, ignore_errors=True)


def _parse_N(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--N expects a comma-separated list of integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("--N list is empty")
    return vals


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("--seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="peakon-lab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write artifacts")
    run.add_argument("--config", metavar="PATH", help="YAML run configuration")
    run.add_argument("--scenario", metavar="NAME")
    run.add_argument("--alpha", type=float, metavar="F")
    run.add_argument("--T", type=float, metavar="F", help="time horizon")
    run.add_argument("--N", type=_parse_N, metavar="LIST", help="particle counts, e.g. 8,16,32,64")
    run.add_argument("--out", metavar="DIR", help="output directory (default $PEAKON_LAB_OUT)")
    run.add_argument("--seed", type=_u64, metavar="U64")
    run.add_argument("--tolerance", type=float, metavar="F", help="slack on inequality margins")
    run.add_argument("-q", "--quiet", action="store_true")

    ls = sub.add_parser("list-scenarios", help="print the built-in scenarios")
    ls.add_argument("-v", "--verbose", action="store_true", help="include descriptions")
    return ap


def config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {
        "scenario": args.scenario, "alpha": args.alpha, "T": args.T, "N_list": args.N,
        "out": args.out, "seed": args.seed, "tolerance": args.tolerance,
    }
    for k, v in overrides.items():
        if v is not None:
            setattr(cfg, k, v)
    return cfg.validate()


def list_scenarios(verbose: bool = False) -> str:
    if not verbose:
        return "\n".join(scenario_names()) + "\n"
    w = max(map(len, SCENARIOS))
    return "".join(f"{n:<{w}}  {SCENARIOS[n][1]}\n" for n in scenario_names())


def cmd_run(args) -> int:
    try:
        cfg = config_from_args(args)
        cfg.scenario = resolve(cfg.scenario)
        if cfg.scenario not in SCENARIOS:
            raise ConfigError(
                f"unknown scenario {cfg.scenario!r}; valid scenarios: {', '.join(scenario_names())}")
    except ConfigError as exc:
        print(f"peakon-lab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_scenario(cfg)
    except ConfigError as exc:
        print(f"peakon-lab: config error in scenario {cfg.scenario}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001  report, never write partial output
        print(f"peakon-lab: scenario {cfg.scenario} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    out = cfg.out_dir()
    write_atomic(out, render_artifacts(cfg, result))
    if not args.quiet:
        for m in result.margins:
            print(f"{'PASS' if m.passed else 'FAIL'}  {m.name:<32} {m.value: .6e}")
        print(f"{cfg.scenario}: {'all margins pass' if result.passed else 'FAILED'} -> {out}")
    return EXIT_OK if result.passed else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-scenarios":
        sys.stdout.write(list_scenarios(args.verbose))
        return EXIT_OK
    return cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
