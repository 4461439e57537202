"""One round of the game on a three-host network, step by step.

Run from the repository root:  python demos/01_one_round.py
"""

from pathlib import Path

import numpy as np

from dpdeception.attacker import AttackerBelief, expected_gains
from dpdeception.defender import AttackEstimate, DefenderBudget, deploy_dp, obfuscate_counts
from dpdeception.engine import GameConfig, resolve_attack
from dpdeception.model import observed_counts

cfg = GameConfig.from_dict(__import__("json").loads((Path(__file__).parent / "worked.json").read_text()))
net = cfg.network
rng = np.random.default_rng(4)

print("hosts (id, real config, utility):")
for h in net.hosts:
    print(f"  s{h.id}  k{h.real_config}  u={h.utility}")

# Step 1: the defender publishes noisy bucket sizes instead of the real ones.
caps = obfuscate_counts(net, cfg.privacy, rng)
print("\nreal counts ", list(net.real_counts))
print("noisy counts", caps.tolist(), "-> total", int(caps.sum()), "vs", net.num_systems, "hosts")

# Step 2: hosts (and any honeypots) are placed under displayed labels.
plan = deploy_dp(net, caps, AttackEstimate.uniform(net.num_configs), DefenderBudget(cfg.budget),
                 cfg.privacy, rng)
print("\nsituation:", plan.situation.value)
print("displayed:", {f"s{h}": f"k{k}" for h, k in plan.displayed.items()})
print("honeypots:", [(f"hp{i}", f"k{k}") for i, k in plan.honeypots])
print("offline:  ", sorted(plan.offline))
print("cost spent:", round(plan.cost_spent, 3))

# Step 3: the attacker scans and scores each label.
seen = observed_counts(plan, net.num_configs)
gains = expected_gains(AttackerBelief.from_network(net), seen)
print("\nscan:", seen.tolist())
print("expected gain per label:", np.round(gains, 3).tolist())

# Step 4: attack the best-looking label and settle.
target = int(np.argmax(gains))
out = resolve_attack(net, plan, target)
print(f"\nattack k{target}: attacker gain {out.attacker_gain}, offline loss {out.offline_loss}")
