"""A reduced budget sweep written to CSV, the same format the CLI emits."""

import sys
from pathlib import Path

from dpdeception.engine import AttackerStrategy, DefenderStrategy
from dpdeception.experiments import emit_csv, run_scenario, scenario

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("sweep_out")
spec = scenario(
    "s3",
    repetitions=3,
    rounds=200,
    defenders=(DefenderStrategy.DP_BASED,),
    attackers=(AttackerStrategy.BAYESIAN,),
)
result = run_scenario(spec, out)
path = emit_csv(result, out / f"scenario_{spec.id}.csv")
print(path.read_text())
