"""The two privacy mechanisms and the round budget, in numbers."""

import math

import numpy as np

from dpdeception.mechanisms import exponential_probabilities, laplace_sample, noisy_count, round_bound

rng = np.random.default_rng(0)

# Laplace noise: mean absolute deviation equals the scale.
for scale in (0.5, 3.3, 33.3):
    draws = np.array([laplace_sample(scale, rng) for _ in range(20_000)])
    print(f"Laplace scale {scale:5.1f}: mean |x| = {np.abs(draws).mean():6.2f}")

# A bucket of 10 hosts, budget 0.3 split over 10 buckets: the released size
# is very noisy, and clamping at zero pushes the average up.
sizes = np.array([noisy_count(10, 1.0, 0.3, 10, rng) for _ in range(20_000)])
print(f"\nnoisy size of a 10-host bucket: mean {sizes.mean():.1f}, "
      f"share clamped to 0: {np.mean(sizes == 0):.2%}")

# Exponential mechanism: a score gap of 2*du*ln(3)/eps gives odds 3:1.
eps, du = 0.5, 4.0
gap = 2 * du * math.log(3) / eps
print("\nexponential mechanism, scores (0, gap):", exponential_probabilities([0.0, gap], eps, du))

print("\nsafe rounds:")
for eps, total in [(0.1, 1.0), (0.3, 3.0), (0.5, 3.0)]:
    print(f"  eps={eps}, overall {total}: {round_bound(eps, total)} rounds")
