"""Command-line interface.

Subcommands:

* ``toy2d``       reproduce the 2-d illustration: blind / refine / fused
                  score surfaces and AUROC cells on the toy generator;
* ``run``         benchmark runs over datasets x epsilon x seeds;
* ``sweep``       the same engine, sweeping beta, epsilon or the test
                  anomaly fraction along a grid;
* ``fuse-files``  fuse two precomputed score files, optionally scoring
                  AUROC against a label file.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import ExperimentConfig, load_config
from .errors import ConfigError, DataError
from .experiments import fuse_score_files, run_experiment, toy_score_grid
from .data import Orientation
from .evaluation import ExperimentReport
from .reporting import (
    write_fused_scores_csv,
    write_grid_csv,
    write_report,
    write_run_meta,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tiltfuse", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="JSON experiment config")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--out", type=Path, help="output directory (overrides config)")
        p.add_argument("--threads", type=int, help="parallel cell workers (overrides config)")

    common(sub.add_parser("toy2d", help="run the 2-d toy comparison"))
    common(sub.add_parser("run", help="run a benchmark experiment"))
    sweep = sub.add_parser("sweep", help="sweep one axis of the experiment grid")
    common(sweep)
    sweep.add_argument(
        "--axis",
        required=True,
        choices=("beta", "epsilon", "test-fraction"),
        help="which grid to sweep (needs >= 2 points in the config)",
    )

    fuse = sub.add_parser("fuse-files", help="fuse two score files")
    fuse.add_argument("base_scores", type=Path)
    fuse.add_argument("evidence_scores", type=Path)
    fuse.add_argument("--labels", type=Path, help="optional label file (index,label)")
    fuse.add_argument("--beta", type=float, default=0.5)
    fuse.add_argument("--ada", action="store_true", help="choose the temperature adaptively")
    fuse.add_argument("--normalization", choices=("none", "zscore", "minmax"), default="zscore")
    fuse.add_argument(
        "--base-orientation",
        choices=("anomaly-high", "inlier-high"),
        default="anomaly-high",
    )
    fuse.add_argument(
        "--evidence-orientation",
        choices=("anomaly-high", "inlier-high"),
        default="anomaly-high",
    )
    fuse.add_argument("--out", type=Path, default=Path("."), help="output directory")
    return parser


def _effective_config(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = str(args.out)
    if args.threads is not None:
        overrides["threads"] = args.threads
    if overrides:
        try:
            config = dataclasses.replace(config, **overrides)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return config


def _ensure_out_dir(config: ExperimentConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_reports(out: Path, config: ExperimentConfig, cells, realized, command: str) -> None:
    write_report(out, ExperimentReport(tuple(cells)).with_aggregates())
    write_run_meta(out / "run_meta.json", config, realized, command)


def _cmd_toy2d(args) -> int:
    config = _effective_config(args)
    if not any(d.is_toy for d in config.datasets):
        config = dataclasses.replace(config, datasets=(type(config.datasets[0])(name="toy"),))
    if args.config is None:
        # toy defaults: the three headline configurations on the 2-d generator
        config = dataclasses.replace(
            config,
            detector=dataclasses.replace(config.detector, name="rbf_svdd"),
            evidence=dataclasses.replace(config.evidence, name="lof", k=config.toy.lof_k),
            methods=("blind", "refine", "ephad"),
            seeds=tuple(range(5)),
        )
    if config.detector.name != "rbf_svdd":
        raise ConfigError("toy2d uses the 2-d one-class model; set detector.name = 'rbf_svdd'")
    out = _ensure_out_dir(config)
    cells, realized = run_experiment(config)
    _write_reports(out, config, cells, realized, "toy2d")
    write_grid_csv(out / "grid.csv", toy_score_grid(config))
    print(f"toy2d: wrote {len(cells)} cells to {out}")
    return 0


def _cmd_run(args) -> int:
    config = _effective_config(args)
    out = _ensure_out_dir(config)
    cells, realized = run_experiment(config)
    _write_reports(out, config, cells, realized, "run")
    print(f"run: wrote {len(cells)} cells to {out}")
    return 0


_AXIS_GRID = {
    "beta": "beta_grid",
    "epsilon": "epsilon_grid",
    "test-fraction": "test_anomaly_fraction_grid",
}


def _cmd_sweep(args) -> int:
    config = _effective_config(args)
    grid_name = _AXIS_GRID[args.axis]
    grid = getattr(config, grid_name)
    if len(grid) < 2:
        raise ConfigError(f"sweep over {args.axis} needs >= 2 points in {grid_name}, got {len(grid)}")
    if args.axis == "beta" and "ephad" not in config.methods:
        raise ConfigError("a beta sweep needs the 'ephad' method")
    out = _ensure_out_dir(config)
    cells, realized = run_experiment(config)
    _write_reports(out, config, cells, realized, f"sweep:{args.axis}")
    print(f"sweep {args.axis}: wrote {len(cells)} cells to {out}")
    return 0


def _cmd_fuse_files(args) -> int:
    result = fuse_score_files(
        args.base_scores,
        args.evidence_scores,
        labels_path=args.labels,
        beta=args.beta,
        use_ada=args.ada,
        base_orientation=Orientation.parse(args.base_orientation),
        evidence_orientation=Orientation.parse(args.evidence_orientation),
        normalization=args.normalization,
    )
    args.out.mkdir(parents=True, exist_ok=True)
    target = args.out / "fused.csv"
    write_fused_scores_csv(target, result.fused.values, result.beta_used)
    print(f"fuse-files: wrote {target} (beta_used={result.beta_used:.6g})")
    if result.auroc is not None:
        print(f"AUROC: {result.auroc:.6g}")
    return 0


_COMMANDS = {
    "toy2d": _cmd_toy2d,
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "fuse-files": _cmd_fuse_files,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
