"""Command line entry point: ``dpdeception {run,game,verify}``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .engine import GameConfig, play_game
from .experiments import SCENARIOS, emit_csv, run_scenario, scenario


def _seed_arg(value: str) -> int:
    seed = int(value, 0)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return seed


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpdeception", description="Differentially private deception game.")
    parser.add_argument("--threads", type=_positive_int, default=1, help="worker processes for independent games")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario sweep and write DIR/scenario_<id>.csv")
    run.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    run.add_argument("--out", required=True, type=Path)
    run.add_argument("--reps", type=_positive_int, default=None)
    run.add_argument("--seed", type=_seed_arg, default=None, help="first seed; CDG_SEED overrides")
    run.add_argument("--rounds", type=_positive_int, default=None, help="rounds per game (sweep value wins for s4rounds)")

    game = sub.add_parser("game", help="play one game from a JSON config")
    game.add_argument("--config", required=True, type=Path)
    game.add_argument("--out", required=True, type=Path)

    verify = sub.add_parser("verify", help="run the mechanism and closed-form oracle checks")
    verify.add_argument("--rounds", type=_positive_int, default=100_000, help="Monte-Carlo rounds per loss check")
    return parser


def _cmd_run(args) -> int:
    overrides = {}
    if args.reps is not None:
        overrides["repetitions"] = args.reps
    if args.rounds is not None:
        overrides["rounds"] = args.rounds
    seed = args.seed
    env_seed = os.environ.get("CDG_SEED")
    if env_seed:
        seed = _seed_arg(env_seed)
    if seed is not None:
        overrides["seed_base"] = seed
    spec = scenario(args.scenario, **overrides)
    result = run_scenario(spec, args.out, threads=args.threads)
    path = emit_csv(result, args.out / f"scenario_{spec.id}.csv")
    print(f"wrote {path} ({len(result.rows)} rows)")
    if result.violations:
        print(f"{len(result.violations)} invariant violations, first: {result.violations[0]}", file=sys.stderr)
        return 1
    return 0


def _cmd_game(args) -> int:
    data = json.loads(args.config.read_text())
    config = GameConfig.from_dict(data)
    env_seed = os.environ.get("CDG_SEED")
    if env_seed:
        config = GameConfig.from_dict({**data, "seed": _seed_arg(env_seed)})
    result = play_game(config)
    csv_path, json_path = result.write(args.out, stem=args.config.stem)
    print(f"wrote {csv_path} and {json_path}")
    print(f"mean attacker gain {result.mean_attacker_gain:.4f}, mean defender cost {result.mean_defender_cost:.4f}")
    return 1 if result.violations else 0


def _cmd_verify(args) -> int:
    from .verify import loss_checks, mechanism_checks

    failed = []
    for check in mechanism_checks() + loss_checks(args.rounds):
        print(check.line())
        if not check.passed:
            failed.append(check.name)
    if failed:
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "game": _cmd_game, "verify": _cmd_verify}
    try:
        return handlers[args.command](args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
