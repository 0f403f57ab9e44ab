"""Command line entry point: canned experiments, custom configs, log replay."""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .explore import ReplayError
from .harness import (
    parse_config,
    replay_log_file,
    run_pipeline,
    sim1_config,
    sim2_config,
    write_artifacts,
)
from .memory import NothingToLearnError
from .worldsim import PlacementError


def _parse_k(value: str):
    if value == "auto":
        return None
    return int(value)


def _parse_snapshots(value: str) -> tuple[int, ...]:
    if not value or value == "-":
        return ()
    return tuple(int(v) for v in value.split(","))


def _add_run_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=None, help="RNG seed")
    sub.add_argument("--changes", type=int, default=None, help="number of scene changes")
    sub.add_argument(
        "--env-change-prob",
        type=float,
        default=None,
        help="per-change probability of redrawing the environment field",
    )
    sub.add_argument("--k", default=None, help="cluster count, or 'auto' for the eigengap estimate")
    sub.add_argument("--alpha", type=float, default=None, help="probability threshold for extraction")
    sub.add_argument("--out", default=None, help="output directory")
    sub.add_argument(
        "--snapshots",
        default=None,
        help="comma-separated scene indices at which to dump the probability matrix",
    )


def _apply_overrides(config, args):
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.changes is not None:
        updates["n_changes"] = args.changes
    if args.env_change_prob is not None:
        updates["env_change_prob"] = args.env_change_prob
    if args.k is not None:
        updates["k"] = _parse_k(args.k)
    if args.alpha is not None:
        updates["alpha"] = args.alpha
    if args.snapshots is not None:
        updates["snapshots"] = _parse_snapshots(args.snapshots)
    return replace(config, **updates) if updates else config


def _run_and_report(config, out) -> int:
    result = run_pipeline(config)
    outdir = write_artifacts(result, out)
    catalog = result.experiment.catalog
    full_density = sum(1 for d in result.extraction.densities if d == 1.0)
    overall = "-" if result.purity.overall is None else f"{result.purity.overall:.3f}"
    print(f"states: {len(catalog)} ({catalog.dropped_occurrences} duplicate occurrences dropped)")
    print(f"records: {len(result.experiment.store)}")
    print(f"k: {result.assignment.k} (eigengap estimate {result.assignment.k_estimate})")
    print(f"overall purity: {overall}")
    print(
        f"components at alpha={result.config.alpha!r}: "
        f"{len(result.extraction.components)} ({full_density} fully interconnected)"
    )
    print(f"wrote: {outdir}")
    return 0


def _cmd_sim1(args) -> int:
    config = sim1_config()
    if args.variant_changing_env:
        config = replace(config, env_change_prob=0.05)
    config = _apply_overrides(config, args)
    return _run_and_report(config, args.out or "sim1_run")


def _cmd_sim2(args) -> int:
    config = _apply_overrides(sim2_config(), args)
    return _run_and_report(config, args.out or "sim2_run")


def _cmd_custom(args) -> int:
    config = parse_config(Path(args.config).read_text())
    config = _apply_overrides(config, args)
    return _run_and_report(config, args.out or "custom_run")


def _cmd_replay(args) -> int:
    c = replay_log_file(args.log, expect_csv=args.expect)
    print(f"replayed probability matrix for {c.shape[0]} states")
    if args.expect is not None:
        print(f"matches {args.expect}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smobjects",
        description="Discover objects as networks of highly probable sensorimotor transitions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim1 = sub.add_parser("sim1", help="1D world: 150 cells, one 40-cell object")
    _add_run_flags(sim1)
    sim1.add_argument(
        "--variant-changing-env",
        action="store_true",
        help="redraw the environment field with probability 0.05 per change",
    )
    sim1.set_defaults(func=_cmd_sim1)

    sim2 = sub.add_parser("sim2", help="2D world: 50x50 cells, three 20x20 objects")
    _add_run_flags(sim2)
    sim2.set_defaults(func=_cmd_sim2)

    custom = sub.add_parser("custom", help="run a config file")
    custom.add_argument("--config", required=True, help="path to a key = value config file")
    _add_run_flags(custom)
    custom.set_defaults(func=_cmd_custom)

    rep = sub.add_parser("replay", help="recompute C from an event log")
    rep.add_argument("log", help="events.log produced by a run")
    rep.add_argument(
        "--expect",
        default=None,
        help="c_matrix.csv to compare against, byte for byte",
    )
    rep.set_defaults(func=_cmd_replay)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PlacementError, NothingToLearnError, ReplayError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
