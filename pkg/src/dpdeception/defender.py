"""Defender strategies: the DP-based deployment and the two greedy baselines."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .mechanisms import PrivacyParams, exponential_probabilities, noisy_count
from .model import DeploymentPlan, NetworkSpec, Situation, SystemHost


@dataclass(frozen=True)
class AttackEstimate:
    """The defender's running estimate ``p(k)`` of where the next attack lands.

    ``current_p`` is only refreshed every ``cadence`` rounds, so between
    refreshes the defender plays against a stale estimate.
    """

    attack_counts: tuple[int, ...]
    rounds_seen: int
    current_p: tuple[float, ...]

    @classmethod
    def uniform(cls, num_configs: int) -> "AttackEstimate":
        return cls((0,) * num_configs, 0, (1.0 / num_configs,) * num_configs)

    @property
    def p(self) -> np.ndarray:
        return np.asarray(self.current_p, dtype=float)


def update_attack_estimate(est: AttackEstimate, attacked: int, cadence: int = 10) -> AttackEstimate:
    if cadence < 1:
        raise ValueError("cadence must be >= 1")
    counts = list(est.attack_counts)
    counts[attacked] += 1
    rounds = est.rounds_seen + 1
    p = est.current_p
    if rounds % cadence == 0:
        p = tuple(c / rounds for c in counts)
    return AttackEstimate(tuple(counts), rounds, p)


@dataclass
class DefenderBudget:
    per_round_budget: float
    spent_this_round: float = 0.0

    def __post_init__(self):
        if self.per_round_budget < 0:
            raise ValueError("budget must be non-negative")

    def reset(self) -> None:
        self.spent_this_round = 0.0

    def affords(self, cost: float) -> bool:
        return self.spent_this_round + cost <= self.per_round_budget

    def charge(self, cost: float) -> None:
        self.spent_this_round += cost


def obfuscate_counts(net: NetworkSpec, params: PrivacyParams, rng: np.random.Generator) -> np.ndarray:
    """Noisy per-configuration bucket sizes; the whole budget is split over |K| counts."""
    K = net.num_configs
    return np.array(
        [noisy_count(n, params.sensitivity, params.epsilon_per_round, K, rng) for n in net.real_counts],
        dtype=np.int64,
    )


def _host_scores(net: NetworkSpec, p: np.ndarray) -> np.ndarray:
    return p * net.config_utility_sums


def _assign_hosts(
    hosts: Sequence[SystemHost],
    probs: np.ndarray,
    capacities: np.ndarray,
    filled: np.ndarray,
    net: NetworkSpec,
    budget: DefenderBudget,
    rng: np.random.Generator,
) -> dict[int, int]:
    """Exponential-mechanism assignment of hosts to displayed configurations.

    A full bucket triggers a resample, at most |K| times; a budget breach or
    exhausted resamples leaves the host under its real configuration for free.
    ``filled`` is updated in place.
    """
    catalog = net.catalog
    K = net.num_configs
    cdf = np.cumsum(probs).tolist()
    total = cdf[-1]
    caps = [int(c) for c in capacities]
    fill = [int(f) for f in filled]
    displayed: dict[int, int] = {}
    for host in hosts:
        real = host.real_config
        shown = real
        for _ in range(K + 1):
            k = min(bisect_right(cdf, rng.random() * total), K - 1)
            cost = catalog.obfuscation_cost(k, real)
            if not budget.affords(cost):
                break
            if fill[k] < caps[k]:
                shown = k
                budget.charge(cost)
                break
        fill[shown] += 1
        displayed[host.id] = shown
    filled[:] = fill
    return displayed


def deploy_equal(
    net: NetworkSpec,
    capacities: Sequence[int],
    est: AttackEstimate,
    budget: DefenderBudget,
    params: PrivacyParams,
    rng: np.random.Generator,
) -> DeploymentPlan:
    """Deployment when the noisy total equals the true number of hosts."""
    capacities = np.asarray(capacities, dtype=np.int64)
    step = params.epsilon_per_round / net.num_systems
    probs = exponential_probabilities(_host_scores(net, est.p), step, float(net.host_utilities.max()))
    filled = np.zeros(net.num_configs, dtype=np.int64)
    start = budget.spent_this_round
    displayed = _assign_hosts(net.ranked_hosts, probs, capacities, filled, net, budget, rng)
    return DeploymentPlan(displayed, cost_spent=budget.spent_this_round - start, situation=Situation.EQUAL)


def deploy_honeypots(
    net: NetworkSpec,
    capacities: Sequence[int],
    est: AttackEstimate,
    budget: DefenderBudget,
    params: PrivacyParams,
    rng: np.random.Generator,
    honeypot_id_start: int | None = None,
) -> DeploymentPlan:
    """Deployment when the noisy total exceeds the true number of hosts.

    Honeypots are placed first (scored by ``p(k') * u_k'``), then genuine
    hosts as in :func:`deploy_equal`. The deployment epsilon grows to
    ``|N'|/|N| * eps`` to cover the extra items.
    """
    capacities = np.asarray(capacities, dtype=np.int64)
    N = net.num_systems
    extra = int(capacities.sum()) - N
    catalog = net.catalog
    sensitivity = float(net.host_utilities.max())
    deploy_eps = params.epsilon_per_round * (N + extra) / N
    next_id = net.max_host_id + 1 if honeypot_id_start is None else honeypot_id_start
    start = budget.spent_this_round

    filled = np.zeros(net.num_configs, dtype=np.int64)
    honeypots: list[tuple[int, int]] = []
    if extra > 0:
        hp_probs = exponential_probabilities(est.p * catalog.utility_array, deploy_eps / extra, sensitivity)
        cdf = np.cumsum(hp_probs)
        draws = np.minimum(np.searchsorted(cdf, rng.random(extra) * cdf[-1], side="right"), len(cdf) - 1)
        for k in draws.tolist():
            cost = catalog.honeypot_cost(k)
            if not budget.affords(cost):
                break
            budget.charge(cost)
            honeypots.append((next_id, k))
            next_id += 1
            filled[k] += 1

    probs = exponential_probabilities(_host_scores(net, est.p), deploy_eps / N, sensitivity)
    displayed = _assign_hosts(net.ranked_hosts, probs, capacities, filled, net, budget, rng)
    return DeploymentPlan(
        displayed,
        honeypots=tuple(honeypots),
        cost_spent=budget.spent_this_round - start,
        situation=Situation.HONEYPOT,
    )


def choose_offline(net: NetworkSpec, p: np.ndarray, count: int) -> list[int]:
    """Hosts to take offline: repeatedly the one maximising ``p(k) * u - l_k``."""
    if count <= 0:
        return []
    catalog = net.catalog
    # max of (value, -id) == argmax with lowest id on ties
    ranked = sorted(
        net.hosts,
        key=lambda h: (p[h.real_config] * h.utility - catalog.offline_loss(h.real_config), -h.id),
        reverse=True,
    )
    return [h.id for h in ranked[:count]]


def deploy_offline(
    net: NetworkSpec,
    capacities: Sequence[int],
    est: AttackEstimate,
    budget: DefenderBudget,
    params: PrivacyParams,
    rng: np.random.Generator,
) -> DeploymentPlan:
    """Deployment when the noisy total falls short: surplus hosts go offline."""
    capacities = np.asarray(capacities, dtype=np.int64)
    N = net.num_systems
    online_total = int(capacities.sum())
    p = est.p
    offline = frozenset(choose_offline(net, p, N - online_total))
    start = budget.spent_this_round
    if online_total == 0:
        return DeploymentPlan({}, offline=offline, situation=Situation.OFFLINE)

    catalog = net.catalog
    K = net.num_configs
    online_sum = np.zeros(K)
    offline_sum = np.zeros(K)
    for h in net.hosts:
        if h.id in offline:
            offline_sum[h.real_config] += catalog.offline_loss(h.real_config)
        else:
            online_sum[h.real_config] += h.utility
    scores = p * online_sum + offline_sum

    deploy_eps = params.epsilon_per_round * online_total / N
    probs = exponential_probabilities(scores, deploy_eps / online_total, float(net.host_utilities.max()))
    hosts = [h for h in net.ranked_hosts if h.id not in offline]
    filled = np.zeros(K, dtype=np.int64)
    displayed = _assign_hosts(hosts, probs, capacities, filled, net, budget, rng)
    return DeploymentPlan(
        displayed,
        offline=offline,
        cost_spent=budget.spent_this_round - start,
        situation=Situation.OFFLINE,
    )


def deploy_dp(
    net: NetworkSpec,
    capacities: Sequence[int],
    est: AttackEstimate,
    budget: DefenderBudget,
    params: PrivacyParams,
    rng: np.random.Generator,
    honeypot_id_start: int | None = None,
) -> DeploymentPlan:
    """Dispatch to the deployment matching the noisy total."""
    situation = Situation.from_totals(int(np.sum(capacities)), net.num_systems)
    if situation is Situation.EQUAL:
        return deploy_equal(net, capacities, est, budget, params, rng)
    if situation is Situation.HONEYPOT:
        return deploy_honeypots(net, capacities, est, budget, params, rng, honeypot_id_start)
    return deploy_offline(net, capacities, est, budget, params, rng)


def _greedy_choice(
    host: SystemHost,
    p: np.ndarray,
    net: NetworkSpec,
    budget: DefenderBudget,
    open_configs: Sequence[int],
) -> int | None:
    catalog = net.catalog
    best = None
    best_key = None
    for k in open_configs:
        cost = catalog.obfuscation_cost(k, host.real_config)
        if not budget.affords(cost):
            continue
        key = (p[k] * host.utility, cost, k)
        if best_key is None or key < best_key:
            best, best_key = k, key
    return best


def _greedy_plan(
    net: NetworkSpec,
    est: AttackEstimate,
    budget: DefenderBudget,
    capacities: Sequence[int] | None,
    mix_prob: float,
    rng: np.random.Generator | None,
) -> DeploymentPlan:
    K = net.num_configs
    p = est.p
    catalog = net.catalog
    remaining = None if capacities is None else np.asarray(capacities, dtype=np.int64).copy()
    start = budget.spent_this_round
    displayed: dict[int, int] = {}
    for host in sorted(net.hosts, key=lambda h: (-h.utility, h.id)):
        open_configs = range(K) if remaining is None else [k for k in range(K) if remaining[k] > 0]
        if rng is not None and mix_prob < 1.0 and rng.random() >= mix_prob:
            choice = None
            if open_configs:
                k = int(open_configs[int(rng.integers(len(open_configs)))])
                if budget.affords(catalog.obfuscation_cost(k, host.real_config)):
                    choice = k
        else:
            choice = _greedy_choice(host, p, net, budget, open_configs)
        shown = host.real_config if choice is None else choice
        budget.charge(catalog.obfuscation_cost(shown, host.real_config))
        if remaining is not None:
            remaining[shown] -= 1
        displayed[host.id] = shown
    return DeploymentPlan(displayed, cost_spent=budget.spent_this_round - start, situation=Situation.EQUAL)


def greedy_deploy(
    net: NetworkSpec,
    est: AttackEstimate,
    budget: DefenderBudget,
    capacities: Sequence[int] | None = None,
) -> DeploymentPlan:
    """Deterministic greedy obfuscation.

    Hosts are visited from the most to the least valuable and each is shown
    as the configuration minimising ``p(k') * u_host``; ties go to the
    cheapest obfuscation, then to the lowest configuration id. With
    ``capacities`` the per-configuration bucket sizes are held fixed
    (typically at the real histogram, so the scan looks unchanged).
    """
    return _greedy_plan(net, est, budget, capacities, 1.0, None)


def greedy_mixed_deploy(
    net: NetworkSpec,
    est: AttackEstimate,
    budget: DefenderBudget,
    mix_prob: float,
    rng: np.random.Generator,
    capacities: Sequence[int] | None = None,
) -> DeploymentPlan:
    """Greedy obfuscation where each host's choice is replaced, with
    probability ``1 - mix_prob``, by a uniformly random configuration."""
    if not 0.0 <= mix_prob <= 1.0:
        raise ValueError("mix_prob must lie in [0, 1]")
    return _greedy_plan(net, est, budget, capacities, mix_prob, rng)
