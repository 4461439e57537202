"""Differentially private cyber-deception game: defender, attackers and round engine."""

from .model import (
    ConfigurationCatalog,
    ConfigurationError,
    DeploymentPlan,
    NetworkSpec,
    RoundRecord,
    Situation,
    SystemHost,
    build_network,
    observed_counts,
)
from .mechanisms import (
    PrivacyAccountant,
    PrivacyParams,
    accountant_tick,
    exponential_probabilities,
    exponential_select,
    laplace_sample,
    noisy_count,
    round_bound,
)
from .engine import (
    AttackerStrategy,
    DefenderStrategy,
    GameConfig,
    GameResult,
    closed_form_loss,
    play_game,
    play_round,
)

__version__ = "0.1.0"
