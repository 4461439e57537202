"""Ground-truth types for the cyber deception game.

A network is a set of hosts, each with a real configuration drawn from a
catalog of configurations. Every configuration carries a utility; a host
inherits the utility of its real configuration. The defender re-displays
hosts under other configuration labels each round (a ``DeploymentPlan``),
and the outcome of one round is summarised by a ``RoundRecord``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class ConfigurationError(ValueError):
    """Raised for invalid network or game parameters."""


class Situation(str, enum.Enum):
    EQUAL = "Equal"
    HONEYPOT = "Honeypot"
    OFFLINE = "Offline"

    @classmethod
    def from_totals(cls, noisy_total: int, true_total: int) -> "Situation":
        if noisy_total == true_total:
            return cls.EQUAL
        return cls.HONEYPOT if noisy_total > true_total else cls.OFFLINE


@dataclass(frozen=True)
class ConfigurationCatalog:
    """Per-configuration utilities and the cost coefficients derived from them.

    Obfuscating a host into configuration ``k'`` costs
    ``obfuscation_cost_coeff * u[k']`` (nothing if ``k' == k``), a honeypot
    shown as ``k`` costs ``honeypot_cost_coeff * u[k]`` and taking a host of
    configuration ``k`` offline loses ``offline_loss_coeff * u[k]``.
    """

    utilities: tuple[float, ...]
    obfuscation_cost_coeff: float = 0.1
    honeypot_cost_coeff: float = 0.2
    offline_loss_coeff: float = 0.15

    def __post_init__(self):
        object.__setattr__(self, "utilities", tuple(float(u) for u in self.utilities))
        if len(self.utilities) < 1:
            raise ConfigurationError("catalog needs at least one configuration")
        if any(u <= 0 for u in self.utilities):
            raise ConfigurationError(f"utilities must be positive, got {self.utilities}")
        for name in ("obfuscation_cost_coeff", "honeypot_cost_coeff", "offline_loss_coeff"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be non-negative")

    @property
    def num_configs(self) -> int:
        return len(self.utilities)

    @cached_property
    def utility_array(self) -> np.ndarray:
        return np.asarray(self.utilities, dtype=float)

    def obfuscation_cost(self, displayed: int, real: int) -> float:
        if displayed == real:
            return 0.0
        return self.obfuscation_cost_coeff * self.utilities[displayed]

    def honeypot_cost(self, k: int) -> float:
        return self.honeypot_cost_coeff * self.utilities[k]

    def offline_loss(self, k: int) -> float:
        return self.offline_loss_coeff * self.utilities[k]


@dataclass(frozen=True)
class SystemHost:
    id: int
    real_config: int
    utility: float


@dataclass(frozen=True)
class NetworkSpec:
    hosts: tuple[SystemHost, ...]
    catalog: ConfigurationCatalog
    real_counts: tuple[int, ...] = ()

    def __post_init__(self):
        hosts = tuple(self.hosts)
        object.__setattr__(self, "hosts", hosts)
        K = self.catalog.num_configs
        ids = [h.id for h in hosts]
        if len(set(ids)) != len(ids):
            raise ConfigurationError("host ids must be unique")
        counts = [0] * K
        for h in hosts:
            if not 0 <= h.real_config < K:
                raise ConfigurationError(f"host {h.id} has unknown configuration {h.real_config}")
            if h.utility != self.catalog.utilities[h.real_config]:
                raise ConfigurationError(
                    f"host {h.id} utility {h.utility} differs from its configuration's utility"
                )
            counts[h.real_config] += 1
        if self.real_counts and tuple(self.real_counts) != tuple(counts):
            raise ConfigurationError("real_counts does not match the host assignments")
        object.__setattr__(self, "real_counts", tuple(counts))

    @classmethod
    def from_assignments(
        cls, utilities: Sequence[float], assignments: Sequence[int], **coeffs
    ) -> "NetworkSpec":
        catalog = ConfigurationCatalog(tuple(utilities), **coeffs)
        hosts = tuple(
            SystemHost(i, int(k), catalog.utilities[int(k)]) for i, k in enumerate(assignments)
        )
        return cls(hosts, catalog)

    @property
    def num_systems(self) -> int:
        return len(self.hosts)

    @property
    def num_configs(self) -> int:
        return self.catalog.num_configs

    @cached_property
    def host_ids(self) -> np.ndarray:
        return np.array([h.id for h in self.hosts], dtype=np.int64)

    @cached_property
    def host_configs(self) -> np.ndarray:
        return np.array([h.real_config for h in self.hosts], dtype=np.int64)

    @cached_property
    def host_utilities(self) -> np.ndarray:
        return np.array([h.utility for h in self.hosts], dtype=float)

    @cached_property
    def utility_by_id(self) -> dict[int, float]:
        return {h.id: h.utility for h in self.hosts}

    @cached_property
    def config_by_id(self) -> dict[int, int]:
        return {h.id: h.real_config for h in self.hosts}

    @cached_property
    def config_utility_sums(self) -> np.ndarray:
        """Total utility of the hosts really running each configuration."""
        return np.bincount(self.host_configs, weights=self.host_utilities, minlength=self.num_configs)

    @cached_property
    def ranked_hosts(self) -> tuple[SystemHost, ...]:
        """Hosts in increasing utility, host id breaking ties."""
        return tuple(sorted(self.hosts, key=lambda h: (h.utility, h.id)))

    @property
    def max_host_id(self) -> int:
        return max((h.id for h in self.hosts), default=-1)

    def to_dict(self) -> dict:
        return {
            "num_systems": self.num_systems,
            "num_configs": self.num_configs,
            "utilities": list(self.catalog.utilities),
            "assignments": [h.real_config for h in self.hosts],
            "obfuscation_cost_coeff": self.catalog.obfuscation_cost_coeff,
            "honeypot_cost_coeff": self.catalog.honeypot_cost_coeff,
            "offline_loss_coeff": self.catalog.offline_loss_coeff,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkSpec":
        utilities = data["utilities"]
        assignments = data["assignments"]
        if "num_configs" in data and data["num_configs"] != len(utilities):
            raise ConfigurationError("num_configs does not match the utilities list")
        if "num_systems" in data and data["num_systems"] != len(assignments):
            raise ConfigurationError("num_systems does not match the assignments list")
        coeffs = {
            key: data[key]
            for key in ("obfuscation_cost_coeff", "honeypot_cost_coeff", "offline_loss_coeff")
            if key in data
        }
        return cls.from_assignments(utilities, assignments, **coeffs)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "NetworkSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


def build_network(
    num_systems: int,
    num_configs: int,
    utility_range: tuple[float, float],
    rng: np.random.Generator,
    **coeffs,
) -> NetworkSpec:
    """Draw a random network.

    Each configuration's utility is uniform on ``utility_range`` and each
    host's real configuration is uniform over the catalog.
    """
    low, high = utility_range
    if num_configs < 2 or num_systems < num_configs:
        raise ConfigurationError(
            f"need num_systems >= num_configs >= 2, got {num_systems}, {num_configs}"
        )
    if low <= 0 or high < low:
        raise ConfigurationError(f"invalid utility range {utility_range}")
    utilities = rng.uniform(low, high, size=num_configs)
    assignments = rng.integers(0, num_configs, size=num_systems)
    return NetworkSpec.from_assignments(utilities.tolist(), assignments.tolist(), **coeffs)


@dataclass(frozen=True)
class DeploymentPlan:
    """What the defender shows the attacker in one round."""

    displayed: dict[int, int]
    honeypots: tuple[tuple[int, int], ...] = ()
    offline: frozenset[int] = frozenset()
    cost_spent: float = 0.0
    situation: Situation = Situation.EQUAL

    def validate(self, net: NetworkSpec, budget: float | None = None) -> None:
        """Raise ``AssertionError`` if the plan breaks a structural invariant."""
        host_ids = set(net.config_by_id)
        shown = set(self.displayed)
        assert not (shown & self.offline), "host both displayed and offline"
        assert shown | self.offline == host_ids, "displayed and offline must cover every host"
        hp_ids = [hp for hp, _ in self.honeypots]
        assert len(set(hp_ids)) == len(hp_ids), "duplicate honeypot id"
        assert not (set(hp_ids) & host_ids), "honeypot id collides with a host id"
        if self.honeypots:
            assert self.situation is Situation.HONEYPOT
        if self.offline:
            assert self.situation is Situation.OFFLINE
        K = net.num_configs
        assert all(0 <= k < K for k in self.displayed.values())
        assert all(0 <= k < K for _, k in self.honeypots)
        if budget is not None:
            assert self.cost_spent <= budget + 1e-9, "cost exceeds budget"


def observed_counts(plan: DeploymentPlan, num_configs: int) -> np.ndarray:
    """Bucket sizes the attacker sees when scanning: online hosts plus honeypots."""
    counts = np.zeros(num_configs, dtype=np.int64)
    for k in plan.displayed.values():
        counts[k] += 1
    for _, k in plan.honeypots:
        counts[k] += 1
    return counts


@dataclass(frozen=True)
class RoundRecord:
    round: int
    target: int
    attacker_gain: float
    defender_loss: float
    defender_cost: float
    situation: Situation = Situation.EQUAL
    attacked_feedback: tuple[tuple[int, int], ...] = field(default=(), repr=False)
    accountant_warning: bool = False
    loss_bound: float = float("inf")
    offline_loss: float = 0.0


def top_utility_sum(utilities: Iterable[float], m: int) -> float:
    """Sum of the ``m`` largest utilities."""
    if m <= 0:
        return 0.0
    return float(sum(sorted(utilities, reverse=True)[:m]))
