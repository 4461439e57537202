"""The round loop and closed-form loss oracles."""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .attacker import (
    AttackerBelief,
    SelectionPolicy,
    ValueAgent,
    epsilon_greedy_select,
    expected_gains,
    record_feedback,
)
from .defender import (
    AttackEstimate,
    DefenderBudget,
    choose_offline,
    deploy_dp,
    greedy_deploy,
    greedy_mixed_deploy,
    obfuscate_counts,
    update_attack_estimate,
)
from .mechanisms import PrivacyAccountant, PrivacyParams, exponential_probabilities
from .model import DeploymentPlan, NetworkSpec, RoundRecord, Situation, observed_counts, top_utility_sum


class DefenderStrategy(str, enum.Enum):
    DP_BASED = "DPBased"
    GREEDY = "Greedy"
    GREEDY_MIXED = "GreedyMixed"


class AttackerStrategy(str, enum.Enum):
    BAYESIAN = "Bayesian"
    VALUE_AGENT = "ValueAgent"


@dataclass(frozen=True)
class GameConfig:
    network: NetworkSpec
    defender_strategy: DefenderStrategy = DefenderStrategy.DP_BASED
    attacker_strategy: AttackerStrategy = AttackerStrategy.BAYESIAN
    privacy: PrivacyParams = field(default_factory=PrivacyParams)
    budget: float = 1000.0
    rounds: int = 1000
    seed: int = 0
    cadence: int = 10
    exploration_e: float = 0.1
    mix_prob: float = 0.8
    accounting_mode: str = "paper"
    check_invariants: bool = True

    def __post_init__(self):
        object.__setattr__(self, "defender_strategy", DefenderStrategy(self.defender_strategy))
        object.__setattr__(self, "attacker_strategy", AttackerStrategy(self.attacker_strategy))
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.budget < 0:
            raise ValueError("budget must be non-negative")
        if self.cadence < 1:
            raise ValueError("cadence must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def echo(self) -> dict:
        """JSON-friendly description of the configuration."""
        return {
            "network": self.network.to_dict(),
            "defender_strategy": self.defender_strategy.value,
            "attacker_strategy": self.attacker_strategy.value,
            "epsilon_per_round": self.privacy.epsilon_per_round,
            "sensitivity": self.privacy.sensitivity,
            "overall_epsilon": self.privacy.overall_epsilon,
            "budget": self.budget,
            "rounds": self.rounds,
            "seed": self.seed,
            "cadence": self.cadence,
            "exploration_e": self.exploration_e,
            "mix_prob": self.mix_prob,
            "accounting_mode": self.accounting_mode,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GameConfig":
        net = NetworkSpec.from_dict(data["network"])
        privacy = PrivacyParams(
            data.get("epsilon_per_round", 0.3),
            data.get("sensitivity", 1.0),
            data.get("overall_epsilon", 3.0),
        )
        keys = ("defender_strategy", "attacker_strategy", "budget", "rounds", "seed", "cadence",
                "exploration_e", "mix_prob", "accounting_mode")
        return cls(net, privacy=privacy, **{k: data[k] for k in keys if k in data})


@dataclass
class GameState:
    config: GameConfig
    rng: np.random.Generator
    estimate: AttackEstimate
    budget: DefenderBudget
    accountant: PrivacyAccountant
    belief: AttackerBelief | None = None
    agent: ValueAgent | None = None
    round: int = 0
    next_honeypot_id: int = 0
    violations: list[str] = field(default_factory=list)

    @classmethod
    def new(cls, config: GameConfig) -> "GameState":
        net = config.network
        rng = np.random.default_rng(config.seed)
        state = cls(
            config=config,
            rng=rng,
            estimate=AttackEstimate.uniform(net.num_configs),
            budget=DefenderBudget(config.budget),
            accountant=PrivacyAccountant(config.privacy, mode=config.accounting_mode),
            next_honeypot_id=net.max_host_id + 1,
        )
        if config.attacker_strategy is AttackerStrategy.BAYESIAN:
            state.belief = AttackerBelief.from_network(net)
        else:
            # rewards are whole-bucket gains; normalise by the network's total utility
            state.agent = ValueAgent(net.num_configs, rng, reward_scale=1.0 / float(net.host_utilities.sum()))
        return state


@dataclass(frozen=True)
class AttackOutcome:
    attacker_gain: float
    offline_loss: float
    feedback: tuple[tuple[int, int], ...]
    empty: bool


def resolve_attack(net: NetworkSpec, plan: DeploymentPlan, target: int) -> AttackOutcome:
    """Payoffs of attacking every item displayed under ``target``.

    A genuine host pays the attacker its real utility; a honeypot costs the attacker
    the utility of the label it wears. Offline hosts cost the defender their
    offline loss whatever the target.
    """
    catalog = net.catalog
    gain = 0.0
    feedback = []
    for host_id, shown in plan.displayed.items():
        if shown == target:
            real = net.config_by_id[host_id]
            gain += catalog.utilities[real]
            feedback.append((shown, real))
    honeypot_hits = sum(1 for _, shown in plan.honeypots if shown == target)
    gain -= honeypot_hits * catalog.utilities[target]
    offline = sum(catalog.offline_loss(net.config_by_id[h]) for h in plan.offline)
    return AttackOutcome(gain, offline, tuple(feedback), empty=not feedback and honeypot_hits == 0)


def loss_bound(net: NetworkSpec, plan: DeploymentPlan, offline_loss: float) -> float:
    """Worst-case loss of a plan: the largest bucket filled with the most
    valuable online hosts, plus the offline losses."""
    sizes = np.zeros(net.num_configs, dtype=np.int64)
    for shown in plan.displayed.values():
        sizes[shown] += 1
    online = [net.utility_by_id[h] for h in plan.displayed]
    return top_utility_sum(online, int(sizes.max(initial=0))) + offline_loss


def _defender_plan(state: GameState) -> tuple[DeploymentPlan, np.ndarray | None]:
    cfg = state.config
    net = cfg.network
    if cfg.defender_strategy is DefenderStrategy.DP_BASED:
        capacities = obfuscate_counts(net, cfg.privacy, state.rng)
        plan = deploy_dp(net, capacities, state.estimate, state.budget, cfg.privacy, state.rng,
                         honeypot_id_start=state.next_honeypot_id)
        state.next_honeypot_id += len(plan.honeypots)
        return plan, capacities
    if cfg.defender_strategy is DefenderStrategy.GREEDY:
        return greedy_deploy(net, state.estimate, state.budget), None
    return greedy_mixed_deploy(net, state.estimate, state.budget, cfg.mix_prob, state.rng), None


def play_round(state: GameState) -> RoundRecord:
    cfg = state.config
    net = cfg.network
    state.budget.reset()
    plan, capacities = _defender_plan(state)
    observed = observed_counts(plan, net.num_configs)

    if state.belief is not None:
        gains = expected_gains(state.belief, observed)
        target = epsilon_greedy_select(gains, SelectionPolicy(cfg.exploration_e), state.rng)
    else:
        prev_state = state.agent.state()
        target = state.agent.act(state.rng)

    outcome = resolve_attack(net, plan, target)
    gain = outcome.attacker_gain
    defender_loss = gain + outcome.offline_loss

    if state.belief is not None:
        if outcome.feedback:
            state.belief = record_feedback(state.belief, outcome.feedback)
    else:
        next_state = state.agent.observe(target, gain)
        state.agent.learn((prev_state, target, gain, next_state), state.rng)
    state.estimate = update_attack_estimate(state.estimate, target, cfg.cadence)
    if cfg.defender_strategy is DefenderStrategy.DP_BASED:
        state.accountant = state.accountant.tick()

    bound = loss_bound(net, plan, outcome.offline_loss)
    state.round += 1
    record = RoundRecord(
        round=state.round,
        target=target,
        attacker_gain=gain,
        defender_loss=defender_loss,
        defender_cost=plan.cost_spent,
        situation=plan.situation,
        attacked_feedback=outcome.feedback,
        accountant_warning=state.accountant.warning,
        loss_bound=bound,
        offline_loss=outcome.offline_loss,
    )
    if cfg.check_invariants:
        state.violations.extend(_check_round(net, plan, capacities, record, cfg.budget))
    return record


def _check_round(
    net: NetworkSpec,
    plan: DeploymentPlan,
    capacities: np.ndarray | None,
    record: RoundRecord,
    budget: float,
) -> list[str]:
    problems = []
    try:
        plan.validate(net, budget)
    except AssertionError as exc:
        problems.append(f"round {record.round}: {exc}")
    if capacities is not None and (capacities < 0).any():
        problems.append(f"round {record.round}: negative noisy count")
    if plan.situation is not Situation.OFFLINE and record.attacker_gain != record.defender_loss:
        problems.append(f"round {record.round}: zero-sum broken")
    if record.defender_loss > record.loss_bound + 1e-9:
        problems.append(f"round {record.round}: loss {record.defender_loss} above bound {record.loss_bound}")
    return problems


@dataclass
class GameResult:
    records: list[RoundRecord]
    accountant_final: PrivacyAccountant
    config: GameConfig
    violations: list[str] = field(default_factory=list)

    @property
    def gains(self) -> np.ndarray:
        return np.array([r.attacker_gain for r in self.records])

    @property
    def costs(self) -> np.ndarray:
        return np.array([r.defender_cost for r in self.records])

    @property
    def mean_attacker_gain(self) -> float:
        return float(np.mean(self.gains))

    @property
    def mean_defender_cost(self) -> float:
        return float(np.mean(self.costs))

    def summary(self) -> dict:
        return {
            "seed": self.config.seed,
            "rounds": len(self.records),
            "mean_attacker_gain": self.mean_attacker_gain,
            "mean_defender_cost": self.mean_defender_cost,
            "mean_defender_loss": float(np.mean([r.defender_loss for r in self.records])),
            "max_rounds_bound": self.accountant_final.max_rounds,
            "accountant_breach_round": self.accountant_final.breach_round,
            "invariant_violations": len(self.violations),
            "config": self.config.echo(),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["round", "situation", "target", "attacker_gain", "defender_cost", "accountant_warning"])
        for r in self.records:
            writer.writerow([r.round, r.situation.value, r.target, repr(r.attacker_gain),
                             repr(r.defender_cost), int(r.accountant_warning)])
        return buf.getvalue()

    def write(self, out_dir: str | Path, stem: str = "game") -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{stem}_rounds.csv"
        json_path = out / f"{stem}_summary.json"
        csv_path.write_text(self.to_csv())
        json_path.write_text(json.dumps(self.summary(), indent=2, sort_keys=True))
        return csv_path, json_path


def play_game(config: GameConfig) -> GameResult:
    state = GameState.new(config)
    records = [play_round(state) for _ in range(config.rounds)]
    return GameResult(records, state.accountant, config, state.violations)


def closed_form_loss(
    net: NetworkSpec,
    capacities: Sequence[int],
    p: Sequence[float],
    attack_dist: Sequence[float],
    params: PrivacyParams,
    situation: Situation | None = None,
) -> float:
    """Expected defender loss predicted analytically for a frozen round.

    Each host is assumed to land under label ``k'`` with the exponential
    mechanism's probability ``p_k'`` (step budget ``eps/|N|``) and the
    attacker hits ``k'`` with probability ``attack_dist[k']``. The honeypot
    case scales the loss by ``(2|N| - |N'|)/|N'|`` over all ``|N'|`` items
    (a honeypot counts with its expected displayed utility); the offline case
    subtracts ``u_j - l_j`` for every host taken offline. ``situation``
    overrides the case implied by the capacity total, e.g. to treat
    uncapped buckets as the equal case.
    """
    p = np.asarray(p, dtype=float)
    attack_dist = np.asarray(attack_dist, dtype=float)
    N = net.num_systems
    total = int(np.sum(capacities))
    sensitivity = float(net.host_utilities.max())
    eps = params.epsilon_per_round
    p_display = exponential_probabilities(p * net.config_utility_sums, eps / N, sensitivity)
    hit = float(p_display @ attack_dist)
    all_utility = float(net.host_utilities.sum())
    if situation is None:
        situation = Situation.from_totals(total, N)

    if situation is Situation.EQUAL:
        return all_utility * hit
    if situation is Situation.HONEYPOT:
        extra = total - N
        u = net.catalog.utility_array
        hp_display = exponential_probabilities(p * u, eps * total / N / extra, sensitivity)
        items = all_utility + extra * float(hp_display @ u)
        return (2 * N - total) / total * items * hit
    offline = choose_offline(net, p, N - total)
    saved = sum(net.utility_by_id[h] - net.catalog.offline_loss(net.config_by_id[h]) for h in offline)
    return all_utility * hit - saved
