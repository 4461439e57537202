"""Scenario sweeps over network size, configuration count, budget and epsilon.

Every sweep point plays each defender against each attacker for
``repetitions`` seeds. Rep ``r`` uses seed ``seed_base + r`` both for the
network draw and for the game itself, so all strategy pairs at a point face
the same networks.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .engine import AttackerStrategy, DefenderStrategy, GameConfig, play_game
from .mechanisms import PrivacyParams
from .model import build_network

CSV_HEADER = (
    "sweep_param", "value", "defender", "attacker",
    "mean_gain", "std_gain", "mean_cost", "std_cost", "reps", "seed_base",
)

ALL_DEFENDERS = tuple(DefenderStrategy)
ALL_ATTACKERS = tuple(AttackerStrategy)


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    sweep_param: str
    sweep: tuple
    repetitions: int = 10
    seed_base: int = 0
    num_systems: int = 100
    num_configs: int = 10
    epsilon: float = 0.3
    overall_epsilon: float = 3.0
    budget: float = 1000.0
    rounds: int = 1000
    utility_range: tuple[float, float] = (1.0, 20.0)
    defenders: tuple[DefenderStrategy, ...] = ALL_DEFENDERS
    attackers: tuple[AttackerStrategy, ...] = ALL_ATTACKERS

    def __post_init__(self):
        if not self.sweep:
            raise ValueError("sweep must be nonempty")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.sweep_param not in ("num_systems", "num_configs", "budget", "epsilon", "rounds"):
            raise ValueError(f"unknown sweep parameter {self.sweep_param!r}")

    def point(self, value) -> dict:
        params = {
            "num_systems": self.num_systems,
            "num_configs": self.num_configs,
            "epsilon": self.epsilon,
            "budget": self.budget,
            "rounds": self.rounds,
        }
        params[self.sweep_param] = value
        if self.id == "S1":
            params["num_configs"] = int(value) // 10
        return params

    def game_config(self, value, defender, attacker, rep: int) -> GameConfig:
        pt = self.point(value)
        seed = self.seed_base + rep
        net = build_network(pt["num_systems"], pt["num_configs"], self.utility_range, np.random.default_rng(seed))
        return GameConfig(
            network=net,
            defender_strategy=defender,
            attacker_strategy=attacker,
            privacy=PrivacyParams(pt["epsilon"], 1.0, max(self.overall_epsilon, pt["epsilon"])),
            budget=pt["budget"],
            rounds=int(pt["rounds"]),
            seed=seed,
        )


SCENARIOS = {
    "s1": ScenarioSpec("S1", "num_systems", (50, 100, 150, 200, 250)),
    "s2": ScenarioSpec("S2", "num_configs", (5, 10, 15, 20, 25), num_systems=150),
    "s3": ScenarioSpec("S3", "budget", (30.0, 60.0, 90.0, 120.0, 150.0)),
    "s4": ScenarioSpec("S4", "epsilon", (0.1, 0.2, 0.3, 0.4, 0.5), num_systems=150, num_configs=15),
    "s4rounds": ScenarioSpec("S4rounds", "rounds", (500, 1000, 2000, 3000), num_systems=150, num_configs=15),
}


def scenario(name: str, **overrides) -> ScenarioSpec:
    try:
        base = SCENARIOS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; expected one of {sorted(SCENARIOS)}") from None
    return replace(base, **overrides)


@dataclass(frozen=True)
class GameSummary:
    seed: int
    mean_gain: float
    mean_cost: float
    violations: tuple[str, ...] = ()


@dataclass(frozen=True)
class SweepRow:
    sweep_param: str
    value: float
    defender: str
    attacker: str
    mean_gain: float
    std_gain: float
    mean_cost: float
    std_cost: float
    reps: int
    seed_base: int


@dataclass
class SweepResult:
    spec: ScenarioSpec | None = None
    rows: list[SweepRow] = field(default_factory=list)
    games: dict[tuple, list[GameSummary]] = field(default_factory=dict)

    @property
    def violations(self) -> list[str]:
        return [v for games in self.games.values() for g in games for v in g.violations]

    def row(self, value, defender, attacker) -> SweepRow:
        defender, attacker = DefenderStrategy(defender).value, AttackerStrategy(attacker).value
        for r in self.rows:
            if r.value == value and r.defender == defender and r.attacker == attacker:
                return r
        raise KeyError((value, defender, attacker))


def _fmt_value(value) -> str:
    return format(value, "g")


def raw_path(out_dir: Path, spec: ScenarioSpec, value, defender, attacker, seed: int) -> Path:
    point = f"{spec.id}_{spec.sweep_param}{_fmt_value(value)}_{defender.value}_{attacker.value}"
    return out_dir / "raw" / f"{point}_{seed}.csv"


def read_raw(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Per-round attacker gains and defender costs from a raw game file."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    gains = np.array([float(r["attacker_gain"]) for r in rows])
    costs = np.array([float(r["defender_cost"]) for r in rows])
    return gains, costs


def _run_one(config: GameConfig, path: Path | None) -> GameSummary:
    result = play_game(config)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(result.to_csv())
        tmp.replace(path)  # a half-written file never looks complete
    return GameSummary(config.seed, result.mean_attacker_gain, result.mean_defender_cost, tuple(result.violations))


def _std(xs: Sequence[float]) -> float:
    return float(np.std(xs, ddof=1)) if len(xs) > 1 else 0.0


def run_scenario(spec: ScenarioSpec, out_dir: str | Path | None = None, threads: int = 1) -> SweepResult:
    """Play every game of the sweep and aggregate per point.

    With ``out_dir`` each game's per-round records land in
    ``out_dir/raw/<point>_<seed>.csv``; games whose file already exists are
    read back instead of replayed, so an interrupted sweep resumes.
    """
    out = Path(out_dir) if out_dir is not None else None
    jobs = []
    for value in spec.sweep:
        for defender in map(DefenderStrategy, spec.defenders):
            for attacker in map(AttackerStrategy, spec.attackers):
                for rep in range(spec.repetitions):
                    seed = spec.seed_base + rep
                    path = raw_path(out, spec, value, defender, attacker, seed) if out is not None else None
                    jobs.append(((value, defender, attacker), seed, path, rep))

    summaries: dict[int, GameSummary] = {}
    pending = []
    for i, (key, seed, path, rep) in enumerate(jobs):
        if path is not None and path.exists():
            gains, costs = read_raw(path)
            summaries[i] = GameSummary(seed, float(np.mean(gains)), float(np.mean(costs)))
        else:
            pending.append((i, spec.game_config(key[0], key[1], key[2], rep), path))

    if threads > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [(i, pool.submit(_run_one, cfg, path)) for i, cfg, path in pending]
            for i, fut in futures:
                summaries[i] = fut.result()
    else:
        for i, cfg, path in pending:
            summaries[i] = _run_one(cfg, path)

    result = SweepResult(spec)
    for i, (key, _, _, _) in enumerate(jobs):
        result.games.setdefault(key, []).append(summaries[i])
    for (value, defender, attacker), games in result.games.items():
        gains = [g.mean_gain for g in games]
        costs = [g.mean_cost for g in games]
        result.rows.append(SweepRow(
            spec.sweep_param, value, defender.value, attacker.value,
            float(np.mean(gains)), _std(gains), float(np.mean(costs)), _std(costs),
            len(games), spec.seed_base,
        ))
    order = {d.value: i for i, d in enumerate(DefenderStrategy)}
    order.update({a.value: i for i, a in enumerate(AttackerStrategy)})
    result.rows.sort(key=lambda r: (r.value, order[r.defender], order[r.attacker]))
    return result


def _sig6(x: float) -> str:
    return format(x, ".6g")


def render_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in result.rows:
        writer.writerow([
            r.sweep_param, _fmt_value(r.value), r.defender, r.attacker,
            _sig6(r.mean_gain), _sig6(r.std_gain), _sig6(r.mean_cost), _sig6(r.std_cost),
            r.reps, r.seed_base,
        ])
    return buf.getvalue()


def emit_csv(result: SweepResult, path: str | Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(render_csv(result))
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV to {path}: {exc.strerror or exc}") from exc
    return path


def find_plateaus(series: Iterable[float], min_length: int = 5, rel_tol: float = 0.01) -> list[tuple[int, int]]:
    """Maximal runs of at least ``min_length`` consecutive values that lie
    within ``rel_tol`` of each other, i.e. ``max - min <= rel_tol * max|x|``
    over the run. Returns ``(start, stop)`` half-open index pairs."""
    xs = list(series)
    runs = []
    i = 0
    while i < len(xs):
        lo = hi = xs[i]
        j = i + 1
        while j < len(xs):
            lo2, hi2 = min(lo, xs[j]), max(hi, xs[j])
            if hi2 - lo2 > rel_tol * max(abs(lo2), abs(hi2)):
                break
            lo, hi = lo2, hi2
            j += 1
        if j - i >= min_length:
            runs.append((i, j))
            i = j
        else:
            i += 1
    return runs


def has_plateau(series: Iterable[float], min_length: int = 5, rel_tol: float = 0.01) -> bool:
    return bool(find_plateaus(series, min_length, rel_tol))


def monotone_within(means: Sequence[float], stds: Sequence[float], increasing: bool) -> bool:
    """Consecutive means move the right way, allowing a step backwards of up to
    one standard deviation (the larger of the two points')."""
    for a, b, sa, sb in zip(means, means[1:], stds, stds[1:]):
        slack = max(sa, sb)
        if increasing and b < a - slack:
            return False
        if not increasing and b > a + slack:
            return False
    return True


def window_mean(values: np.ndarray, start: int, stop: int) -> float:
    window = values[start:stop]
    return float(np.mean(window)) if window.size else math.nan
