"""Command-line surface: run QAOA/RQAOA from JSON configs, brute-force
solve, and landscape scans.  Results land as JSON/CSV artifacts in the
output directory; every error prints one machine-parseable JSON line to
stderr.  Exit codes: 0 success, 1 runtime failure, 2 bad configuration."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .errors import ConfigError, InputError, QAOAFlowError, WorkflowError
from .problems import brute_force_solve
from .rqaoa import run_rqaoa
from .workflows import landscape_scan, load_run_config, run_qaoa


def _emit_error(phase: str, message: str):
    print(json.dumps({"error": message, "phase": phase}), file=sys.stderr)


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config {path!r} is not valid JSON: {exc.msg} "
            f"(line {exc.lineno}, column {exc.colno})"
        ) from exc


def _apply_overrides(config: dict, args) -> dict:
    """Command-line flags take precedence over file values."""
    if args.seed is not None:
        config["seed"] = args.seed
    if getattr(args, "p", None) is not None:
        config.setdefault("circuit_properties", {})["p"] = args.p
    if getattr(args, "n_shots", None) is not None:
        config.setdefault("backend_properties", {})["n_shots"] = args.n_shots
    if getattr(args, "maxiter", None) is not None:
        config.setdefault("classical_optimizer", {})["maxiter"] = args.maxiter
    if getattr(args, "method", None) is not None:
        config.setdefault("classical_optimizer", {})["method"] = args.method
    return config


def _json_text(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def _write_manifest(out_dir: Path, config_path: str, artifacts: list[str],
                    duration: float, seed):
    manifest = {
        "config": config_path,
        "output_dir": str(out_dir),
        "artifacts": artifacts,
        "duration_seconds": duration,
        "seed": seed,
    }
    (out_dir / "manifest.json").write_text(_json_text(manifest))


def _cmd_qaoa(args) -> int:
    started = time.monotonic()
    try:
        config = _apply_overrides(_load_config_file(args.config), args)
        setup = load_run_config(config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
    except (ConfigError, InputError) as exc:
        _emit_error("config", str(exc))
        return 2
    try:
        result = run_qaoa(
            setup.problem, setup.spec, setup.backend_config,
            setup.optimizer_config, top_k=setup.top_k, seed=setup.seed,
            initial_values=setup.initial_values,
        )
    except WorkflowError as exc:
        _emit_error(exc.phase, str(exc))
        return 1
    except QAOAFlowError as exc:
        _emit_error("run", str(exc))
        return 1

    artifacts = ["result.json"]
    (out_dir / "result.json").write_text(_json_text(result.to_dict()))
    if setup.optimizer_config.cost_progress:
        (out_dir / "cost_history.csv").write_text(result.log.cost_csv())
        artifacts.append("cost_history.csv")
    _write_manifest(out_dir, args.config, artifacts,
                    time.monotonic() - started, setup.seed)
    if not args.quiet:
        print(f"optimal cost {result.optimal_cost!r} "
              f"({result.termination_reason}, {result.n_evals} evaluations); "
              f"artifacts in {out_dir}")
    return 0


def _cmd_rqaoa(args) -> int:
    started = time.monotonic()
    try:
        config = _apply_overrides(_load_config_file(args.config), args)
        setup = load_run_config(config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
    except (ConfigError, InputError) as exc:
        _emit_error("config", str(exc))
        return 2
    try:
        result = run_rqaoa(
            setup.problem, spec=setup.spec, backend_config=setup.backend_config,
            optimizer_config=setup.optimizer_config,
            rqaoa_config=setup.rqaoa_config, seed=setup.seed,
        )
    except WorkflowError as exc:
        _emit_error(exc.phase, str(exc))
        return 1
    except QAOAFlowError as exc:
        _emit_error("run", str(exc))
        return 1

    payload = result.to_dict()
    payload["qaoa_steps"] = [r.to_dict() for r in result.qaoa_results]
    artifacts = ["result.json", "trace.jsonl"]
    (out_dir / "result.json").write_text(_json_text(payload))
    trace_lines = [json.dumps(r.to_dict(), sort_keys=True) for r in result.records]
    (out_dir / "trace.jsonl").write_text(
        "\n".join(trace_lines) + ("\n" if trace_lines else "")
    )
    if setup.optimizer_config.cost_progress:
        lines = ["iteration,cost"]
        offset = 0
        for step_result in result.qaoa_results:
            for record in step_result.log.records:
                lines.append(f"{offset + record.iteration},{record.cost!r}")
            offset += len(step_result.log.records)
        (out_dir / "cost_history.csv").write_text("\n".join(lines) + "\n")
        artifacts.append("cost_history.csv")
    _write_manifest(out_dir, args.config, artifacts,
                    time.monotonic() - started, setup.seed)
    if not args.quiet:
        print(f"final bitstring {result.bits} with energy {result.energy!r} "
              f"after {len(result.records)} eliminations; artifacts in {out_dir}")
    return 0


def _cmd_brute_force(args) -> int:
    try:
        config = _load_config_file(args.config)
        setup = load_run_config(config)
    except (ConfigError, InputError) as exc:
        _emit_error("config", str(exc))
        return 2
    try:
        if args.limit is not None:
            energy, minimizers = brute_force_solve(setup.problem, limit=args.limit)
        else:
            energy, minimizers = brute_force_solve(setup.problem)
    except QAOAFlowError as exc:
        _emit_error("solve", str(exc))
        return 1
    print(json.dumps(
        {"energy": energy, "bitstrings": [m.bits for m in minimizers]},
        sort_keys=True,
    ))
    return 0


def _cmd_landscape(args) -> int:
    started = time.monotonic()
    try:
        config = _apply_overrides(_load_config_file(args.config), args)
        setup = load_run_config(config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        gammas = np.linspace(args.gamma_range[0], args.gamma_range[1], args.points)
        betas = np.linspace(args.beta_range[0], args.beta_range[1], args.points)
        grid = landscape_scan(
            setup.problem, setup.spec, gammas, betas, setup.backend_config
        )
    except (ConfigError, InputError) as exc:
        _emit_error("config", str(exc))
        return 2
    except QAOAFlowError as exc:
        _emit_error("run", str(exc))
        return 1

    lines = ["gamma,beta,cost"]
    for i, g in enumerate(gammas):
        for j, b in enumerate(betas):
            lines.append(f"{float(g)!r},{float(b)!r},{float(grid[i, j])!r}")
    (out_dir / "landscape.csv").write_text("\n".join(lines) + "\n")
    _write_manifest(out_dir, args.config, ["landscape.csv"],
                    time.monotonic() - started, setup.seed)
    if not args.quiet:
        print(f"{args.points}x{args.points} landscape written to {out_dir}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qaoaflow",
        description="Run QAOA/RQAOA workflows, brute-force solves, and "
                    "landscape scans from JSON configs.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run config")
    common.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    common.add_argument("--quiet", action="store_true",
                        help="suppress the stdout summary")

    sub = parser.add_subparsers(dest="command", required=True)

    qaoa = sub.add_parser("qaoa", parents=[common],
                          help="run one QAOA workflow")
    qaoa.add_argument("--out", required=True, help="output directory")
    qaoa.add_argument("--p", type=int, default=None, help="override layer count")
    qaoa.add_argument("--n-shots", dest="n_shots", type=int, default=None,
                      help="override the shot count (0 = exact)")
    qaoa.add_argument("--maxiter", type=int, default=None,
                      help="override the iteration cap")
    qaoa.add_argument("--method", default=None, help="override the optimizer")
    qaoa.set_defaults(func=_cmd_qaoa)

    rqaoa = sub.add_parser("rqaoa", parents=[common],
                           help="run one recursive-QAOA workflow")
    rqaoa.add_argument("--out", required=True, help="output directory")
    rqaoa.set_defaults(func=_cmd_rqaoa)

    brute = sub.add_parser("brute-force", parents=[common],
                           help="exhaustively solve the config's problem")
    brute.add_argument("--limit", type=int, default=None,
                       help="override the exhaustive size cap")
    brute.set_defaults(func=_cmd_brute_force)

    landscape = sub.add_parser("landscape", parents=[common],
                               help="scan the 2-parameter cost landscape")
    landscape.add_argument("--out", required=True, help="output directory")
    landscape.add_argument("--points", type=int, default=10,
                           help="grid points per axis")
    landscape.add_argument("--gamma-range", nargs=2, type=float,
                           default=[0.0, np.pi], metavar=("LO", "HI"))
    landscape.add_argument("--beta-range", nargs=2, type=float,
                           default=[0.0, np.pi], metavar=("LO", "HI"))
    landscape.set_defaults(func=_cmd_landscape)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
