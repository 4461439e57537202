"""Differential-privacy primitives and the per-game privacy accountant."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np


class PrivacyParameterError(ValueError):
    pass


@dataclass(frozen=True)
class PrivacyParams:
    epsilon_per_round: float = 0.3
    sensitivity: float = 1.0
    overall_epsilon: float = 3.0

    def __post_init__(self):
        if self.epsilon_per_round <= 0 or self.sensitivity <= 0 or self.overall_epsilon <= 0:
            raise PrivacyParameterError("privacy parameters must be positive")
        if self.epsilon_per_round > self.overall_epsilon:
            raise PrivacyParameterError(
                f"per-round epsilon {self.epsilon_per_round} exceeds overall epsilon "
                f"{self.overall_epsilon}"
            )


def laplace_inverse_cdf(u: float, scale: float) -> float:
    """Map ``u`` in (-1/2, 1/2) to a Laplace(0, scale) variate."""
    return -scale * math.copysign(1.0, u) * math.log1p(-2.0 * abs(u))


def laplace_sample(scale: float, rng: np.random.Generator) -> float:
    if not scale > 0:
        raise PrivacyParameterError(f"Laplace scale must be positive, got {scale}")
    u = rng.random() - 0.5
    while u == -0.5:  # log(0) at the open end of the interval
        u = rng.random() - 0.5
    return laplace_inverse_cdf(u, scale)


def noisy_count(
    true_count: int,
    sensitivity: float,
    group_budget: float,
    num_groups: int,
    rng: np.random.Generator,
) -> int:
    """Laplace-perturbed count, rounded up and clamped at zero.

    The budget is shared by ``num_groups`` counts, so each one is perturbed
    at scale ``sensitivity * num_groups / group_budget``.
    """
    if group_budget <= 0 or num_groups < 1:
        raise PrivacyParameterError("group_budget must be positive and num_groups >= 1")
    noise = laplace_sample(sensitivity * num_groups / group_budget, rng)
    return max(0, int(true_count + math.ceil(noise)))


def exponential_probabilities(
    scores: Sequence[float] | np.ndarray, step_budget: float, utility_sensitivity: float
) -> np.ndarray:
    """Selection probabilities of the exponential mechanism.

    Probability of candidate ``j`` is proportional to
    ``exp(step_budget * score_j / (2 * utility_sensitivity))``. Scores are
    shifted by their maximum first, which leaves the distribution unchanged.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise PrivacyParameterError("exponential mechanism needs at least one candidate")
    if utility_sensitivity <= 0:
        raise PrivacyParameterError("utility sensitivity must be positive")
    logits = step_budget * (scores - scores.max()) / (2.0 * utility_sensitivity)
    weights = np.exp(logits)
    return weights / weights.sum()


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Draw an index from a probability vector using one uniform."""
    cdf = np.cumsum(probs)
    idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(idx, len(probs) - 1)


def exponential_select(
    candidates: Sequence[tuple[int, float]],
    step_budget: float,
    utility_sensitivity: float,
    rng: np.random.Generator,
) -> int:
    if not candidates:
        raise PrivacyParameterError("exponential mechanism needs at least one candidate")
    ids = [c for c, _ in candidates]
    probs = exponential_probabilities([s for _, s in candidates], step_budget, utility_sensitivity)
    return ids[sample_index(probs, rng)]


def round_bound(epsilon_per_round: float, overall_epsilon: float) -> int:
    """Largest number of rounds whose accumulated divergence stays within ``overall_epsilon``.

    Each round contributes at most ``eps * (e^eps - 1)`` to the KL divergence
    between the attacker's views of neighbouring networks, and an overall
    level ``eps'`` tolerates ``eps' * (e^eps' - 1)``.
    """
    if epsilon_per_round <= 0 or overall_epsilon <= 0:
        raise PrivacyParameterError("epsilons must be positive")
    ratio = (overall_epsilon * math.expm1(overall_epsilon)) / (
        epsilon_per_round * math.expm1(epsilon_per_round)
    )
    # guard against 163.99999999 style representation error
    return int(math.floor(ratio + 1e-9))


@dataclass(frozen=True)
class PrivacyAccountant:
    """Counts rounds against the safe-round bound.

    ``mode="paper"`` charges one epsilon per round (obfuscation and the single
    deployment algorithm that runs are treated as one epsilon release);
    ``mode="strict"`` composes them sequentially and charges ``2 * epsilon``.
    """

    params: PrivacyParams
    rounds_elapsed: int = 0
    mode: str = "paper"
    warning: bool = False
    breach_round: int | None = None

    def __post_init__(self):
        if self.mode not in ("paper", "strict"):
            raise PrivacyParameterError(f"unknown accounting mode {self.mode!r}")

    @property
    def charge_per_round(self) -> float:
        factor = 2.0 if self.mode == "strict" else 1.0
        return factor * self.params.epsilon_per_round

    @property
    def max_rounds(self) -> int:
        return round_bound(self.charge_per_round, self.params.overall_epsilon)

    @property
    def epsilon_spent(self) -> float:
        return self.rounds_elapsed * self.charge_per_round

    def tick(self) -> "PrivacyAccountant":
        return accountant_tick(self)


def accountant_tick(acc: PrivacyAccountant) -> PrivacyAccountant:
    rounds = acc.rounds_elapsed + 1
    breached = rounds > acc.max_rounds
    return replace(
        acc,
        rounds_elapsed=rounds,
        warning=acc.warning or breached,
        breach_round=acc.breach_round if acc.breach_round is not None or not breached else rounds,
    )
