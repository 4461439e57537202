"""Oracle checks for the mechanisms and the closed-form loss predictions.

Every check returns a :class:`CheckResult`. The frozen instances used for
the loss oracles are small enough to reason about by hand: two
configurations, four hosts.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .attacker import SelectionPolicy, epsilon_greedy_select, selection_probabilities
from .defender import AttackEstimate, DefenderBudget, deploy_equal, deploy_honeypots, deploy_offline
from .engine import closed_form_loss, resolve_attack
from .mechanisms import PrivacyParams, exponential_probabilities, laplace_sample, round_bound
from .model import NetworkSpec, Situation


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(name: str, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    start = time.perf_counter()
    passed, detail = fn()
    return CheckResult(name, bool(passed), detail, time.perf_counter() - start)


def laplace_ks_statistic(n: int = 100_000, scale: float = 1.0, seed: int = 2024) -> float:
    rng = np.random.default_rng(seed)
    draws = np.array([laplace_sample(scale, rng) for _ in range(n)])
    return float(stats.kstest(draws, "laplace", args=(0.0, scale)).statistic)


def exponential_ratio_grid(
    step_budgets: Sequence[float] = (0.01, 0.1, 0.5, 1.0, 3.0),
    sensitivity: float = 1.0,
    values: Sequence[float] = (-2.0, 0.0, 0.5, 3.0),
    num_candidates: int = 3,
) -> float:
    """Largest ``log(P(D)/P(D'))`` over neighbouring score vectors, divided by
    the step budget. Neighbours differ by at most ``sensitivity`` in every
    coordinate. Values above 1 would break the guarantee."""
    worst = 0.0
    shifts = (-sensitivity, 0.0, sensitivity)
    for eps in step_budgets:
        for scores in itertools.product(values, repeat=num_candidates):
            base = exponential_probabilities(scores, eps, sensitivity)
            for delta in itertools.product(shifts, repeat=num_candidates):
                other = exponential_probabilities(np.add(scores, delta), eps, sensitivity)
                ratio = np.max(np.abs(np.log(base) - np.log(other)))
                worst = max(worst, ratio / eps)
    return worst


def selection_sums_exact(max_labels: int = 12) -> bool:
    grid = [Fraction(0), Fraction(1, 10), Fraction(1, 3), Fraction(9, 10), Fraction(1)]
    return all(
        sum(selection_probabilities(K, best, e)) == 1
        for K in range(1, max_labels + 1)
        for best in range(K)
        for e in grid
    )


# Frozen instances for the loss oracles ---------------------------------------

def equal_instance() -> tuple[NetworkSpec, list[int], list[float], list[float], PrivacyParams]:
    """Two configurations worth 2 and 8, two hosts each; buckets uncapped."""
    net = NetworkSpec.from_assignments([2.0, 8.0], [0, 0, 1, 1])
    return net, [4, 4], [0.3, 0.7], [0.75, 0.25], PrivacyParams(20.0, 1.0, 20.0)


def honeypot_instance() -> tuple[NetworkSpec, list[int], list[float], list[float], PrivacyParams]:
    """Equal utilities, one honeypot, every item steered into label 0.

    The closed form is exact when honeypots share the hosts' display
    distribution, are worth the mean host utility and no host runs out of
    resamples; this instance meets all three.
    """
    net = NetworkSpec.from_assignments([5.0, 5.0], [0, 0, 1, 1])
    return net, [5, 0], [1.0, 0.0], [0.8, 0.2], PrivacyParams(400.0, 1.0, 400.0)


def offline_instance() -> tuple[NetworkSpec, list[int], list[float], list[float], PrivacyParams]:
    """One host offline, the rest forced under the attacked label."""
    net = NetworkSpec.from_assignments([2.0, 8.0], [0, 0, 1, 1])
    return net, [3, 0], [1.0, 0.0], [1.0, 0.0], PrivacyParams(400.0, 1.0, 400.0)


_DEPLOYERS = {"equal": deploy_equal, "honeypot": deploy_honeypots, "offline": deploy_offline}


def monte_carlo_loss(
    net: NetworkSpec,
    capacities: Sequence[int],
    p: Sequence[float],
    attack_dist: Sequence[float],
    params: PrivacyParams,
    kind: str,
    rounds: int,
    seed: int = 7,
    budget: float = 1e9,
) -> float:
    """Mean realized defender loss over ``rounds`` independent frozen rounds."""
    rng = np.random.default_rng(seed)
    est = AttackEstimate((0,) * net.num_configs, 0, tuple(p))
    deploy = _DEPLOYERS[kind]
    cdf = np.cumsum(attack_dist)
    targets = np.minimum(np.searchsorted(cdf, rng.random(rounds) * cdf[-1], side="right"), len(cdf) - 1)
    total = 0.0
    wallet = DefenderBudget(budget)
    for target in targets.tolist():
        wallet.reset()
        plan = deploy(net, capacities, est, wallet, params, rng)
        outcome = resolve_attack(net, plan, target)
        total += outcome.attacker_gain + outcome.offline_loss
    return total / rounds


def loss_oracle(kind: str, rounds: int = 100_000, tol: float = 0.02) -> tuple[bool, str]:
    instances = {"equal": equal_instance, "honeypot": honeypot_instance, "offline": offline_instance}
    net, caps, p, dist, params = instances[kind]()
    situation = {"equal": Situation.EQUAL, "honeypot": Situation.HONEYPOT, "offline": Situation.OFFLINE}[kind]
    predicted = closed_form_loss(net, caps, p, dist, params, situation)
    simulated = monte_carlo_loss(net, caps, p, dist, params, kind, rounds)
    rel = abs(simulated - predicted) / abs(predicted)
    return rel <= tol, f"closed form {predicted:.4f}, simulated {simulated:.4f}, rel err {rel:.4f}"


def uniform_attack_bound(gains: Sequence[float] = (5.0, 1.0, 1.0, 3.0), draws: int = 100_000,
                         seed: int = 11) -> tuple[bool, str]:
    """With e = 1 the expected gain is the plain mean of the label gains."""
    gains = np.asarray(gains, dtype=float)
    K = len(gains)
    analytic = float(np.dot(selection_probabilities(K, int(np.argmax(gains)), 1.0), gains))
    mean = float(gains.sum() / K)
    exact = abs(analytic - mean) <= 4 * np.finfo(float).eps * abs(mean)
    rng = np.random.default_rng(seed)
    policy = SelectionPolicy(1.0)
    simulated = float(np.mean([gains[epsilon_greedy_select(gains, policy, rng)] for _ in range(draws)]))
    rel = abs(simulated - mean) / abs(mean)
    return exact and rel <= 0.01, f"analytic {analytic}, mean {mean}, simulated {simulated:.4f} (rel {rel:.4f})"


def mechanism_checks() -> list[CheckResult]:
    def ks():
        stat = laplace_ks_statistic()
        return stat < 0.01, f"KS statistic {stat:.5f} over 1e5 draws"

    def ratio():
        worst = exponential_ratio_grid()
        return worst <= 1.0 + 1e-9, f"max log-ratio / step budget = {worst:.6f}"

    def sums():
        return selection_sums_exact(), "epsilon-greedy probabilities sum to exactly 1 (rational arithmetic)"

    def bounds():
        a, b, c = round_bound(0.1, 1.0), round_bound(0.3, 3.0), round_bound(0.7, 0.7)
        return (a, b, c) == (163, 545, 1), f"round_bound(0.1,1)={a}, round_bound(0.3,3)={b}, equal eps -> {c}"

    return [
        _timed("laplace-ks", ks),
        _timed("exponential-ratio-grid", ratio),
        _timed("selection-sums", sums),
        _timed("round-bound", bounds),
    ]


def loss_checks(rounds: int = 100_000) -> list[CheckResult]:
    return [
        _timed("loss-equal", lambda: loss_oracle("equal", rounds)),
        _timed("loss-honeypot", lambda: loss_oracle("honeypot", rounds)),
        _timed("loss-offline", lambda: loss_oracle("offline", rounds)),
        _timed("uniform-attack-gain", uniform_attack_bound),
    ]


def run_all(rounds: int = 100_000) -> list[CheckResult]:
    return mechanism_checks() + loss_checks(rounds)


__all__ = [
    "CheckResult",
    "equal_instance",
    "exponential_ratio_grid",
    "honeypot_instance",
    "laplace_ks_statistic",
    "loss_checks",
    "loss_oracle",
    "mechanism_checks",
    "monte_carlo_loss",
    "offline_instance",
    "run_all",
    "selection_sums_exact",
    "uniform_attack_bound",
]


if __name__ == "__main__":
    for result in run_all():
        print(result.line())
