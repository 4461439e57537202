"""Three defenders against the Bayesian attacker on a 100-host network.

Short games (300 rounds, 3 seeds) so the script finishes in under a minute.
"""

import numpy as np

from dpdeception.engine import AttackerStrategy, DefenderStrategy, play_game
from dpdeception.experiments import has_plateau, scenario

spec = scenario("s1", rounds=300)
print(f"{'defender':12s} {'gain':>9s} {'cost':>9s}  plateaus")
for defender in DefenderStrategy:
    games = [play_game(spec.game_config(100, defender, AttackerStrategy.BAYESIAN, rep)) for rep in range(3)]
    gain = np.mean([g.mean_attacker_gain for g in games])
    cost = np.mean([g.mean_defender_cost for g in games])
    flat = sum(has_plateau(g.gains) for g in games)
    print(f"{defender.value:12s} {gain:9.2f} {cost:9.2f}  {flat}/3")

# Where the DP defender's rounds land: mostly honeypot rounds at eps = 0.3.
dp = play_game(spec.game_config(100, DefenderStrategy.DP_BASED, AttackerStrategy.BAYESIAN, 0))
kinds, counts = np.unique([r.situation.value for r in dp.records], return_counts=True)
print("\nDP situations:", dict(zip(kinds.tolist(), counts.tolist())))
