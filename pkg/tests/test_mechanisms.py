import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpdeception.mechanisms import (
    PrivacyAccountant,
    PrivacyParameterError,
    PrivacyParams,
    accountant_tick,
    exponential_probabilities,
    exponential_select,
    laplace_inverse_cdf,
    laplace_sample,
    noisy_count,
    round_bound,
)
from dpdeception.verify import exponential_ratio_grid, laplace_ks_statistic


def test_params_validation():
    with pytest.raises(PrivacyParameterError):
        PrivacyParams(0.0)
    with pytest.raises(PrivacyParameterError):
        PrivacyParams(0.5, 1.0, 0.4)
    with pytest.raises(PrivacyParameterError):
        PrivacyParams(0.3, -1.0)


def test_inverse_cdf_median_and_quartiles():
    assert laplace_inverse_cdf(0.0, 2.0) == 0.0
    # P(X <= b ln 2) = 3/4 for Laplace(0, b)
    assert laplace_inverse_cdf(0.25, 2.0) == pytest.approx(2.0 * math.log(2.0))
    assert laplace_inverse_cdf(-0.25, 2.0) == pytest.approx(-2.0 * math.log(2.0))


def test_laplace_rejects_bad_scale():
    with pytest.raises(PrivacyParameterError):
        laplace_sample(0.0, np.random.default_rng(0))


def test_laplace_ks():
    assert laplace_ks_statistic(100_000) < 0.01


def test_laplace_scale_moments():
    rng = np.random.default_rng(5)
    draws = np.array([laplace_sample(3.0, rng) for _ in range(50_000)])
    # mean |X| = b, var = 2 b^2
    assert np.mean(np.abs(draws)) == pytest.approx(3.0, rel=0.03)
    assert np.var(draws) == pytest.approx(18.0, rel=0.05)


class _FixedUniform:
    """Stand-in random source returning a fixed uniform."""

    def __init__(self, u):
        self.u = u

    def random(self):
        return self.u


def test_noisy_count_clamps_large_negative_noise():
    # u close to 0 maps to a very negative Laplace draw
    assert noisy_count(0, 1.0, 0.3, 10, _FixedUniform(1e-12)) == 0


def test_noisy_count_huge_budget_is_ceiling_of_tiny_noise():
    outs = [noisy_count(5, 1.0, 1e6, 1, np.random.default_rng(s)) for s in range(10_000)]
    frac = np.mean([o in (5, 6) for o in outs])
    assert frac >= 0.99


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 50), st.floats(0.01, 5.0), st.integers(1, 30), st.integers(0, 2**32))
def test_noisy_count_non_negative(n, eps, groups, seed):
    assert noisy_count(n, 1.0, eps, groups, np.random.default_rng(seed)) >= 0


def test_exponential_equal_scores_half():
    assert exponential_probabilities([4.0, 4.0], 0.7, 2.0).tolist() == [0.5, 0.5]


def test_exponential_one_to_three():
    eps, du = 0.4, 2.5
    s = 2 * du / eps * math.log(3)
    probs = exponential_probabilities([0.0, s], eps, du)
    assert probs == pytest.approx([0.25, 0.75], abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-50, 50), min_size=1, max_size=8),
    st.floats(0.01, 5.0),
    st.floats(0.1, 20.0),
    st.floats(-100, 100),
)
def test_exponential_sums_to_one_and_shift_invariant(scores, eps, du, shift):
    p = exponential_probabilities(scores, eps, du)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    q = exponential_probabilities(np.add(scores, shift), eps, du)
    assert q == pytest.approx(p, abs=1e-9)


def test_exponential_ratio_grid_within_budget():
    assert exponential_ratio_grid() <= 1.0 + 1e-9


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-10, 10), min_size=2, max_size=5).flatmap(
        lambda s: st.tuples(st.just(s), st.lists(st.floats(-1, 1), min_size=len(s), max_size=len(s)))
    ),
    st.floats(0.05, 3.0),
)
def test_exponential_privacy_ratio(pair, eps):
    scores, delta = pair
    p = exponential_probabilities(scores, eps, 1.0)
    q = exponential_probabilities(np.add(scores, delta), eps, 1.0)
    assert np.all(p / q <= math.exp(eps) * (1 + 1e-9))


def test_exponential_select_frequencies():
    rng = np.random.default_rng(1)
    picks = [exponential_select([(7, 0.0), (9, 2.0 / 1.0 * math.log(3))], 1.0, 1.0, rng) for _ in range(20_000)]
    assert np.mean(np.array(picks) == 9) == pytest.approx(0.75, abs=0.01)


def test_exponential_rejects_empty():
    with pytest.raises(PrivacyParameterError):
        exponential_select([], 1.0, 1.0, np.random.default_rng(0))


def _bound_oracle(eps, eps_total):
    return math.floor(eps_total * (math.exp(eps_total) - 1) / (eps * (math.exp(eps) - 1)))


@pytest.mark.parametrize("eps, total, expected", [(0.1, 1.0, 163), (0.3, 3.0, 545)])
def test_round_bound_values(eps, total, expected):
    assert _bound_oracle(eps, total) == expected
    assert round_bound(eps, total) == expected


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 20.0))
def test_round_bound_equal_epsilons(x):
    assert round_bound(x, x) == 1


def test_accountant_boundary():
    acc = PrivacyAccountant(PrivacyParams(0.3, 1.0, 3.0))
    assert acc.max_rounds == 545
    before = PrivacyAccountant(acc.params, rounds_elapsed=acc.max_rounds - 1)
    assert not accountant_tick(before).warning
    at = PrivacyAccountant(acc.params, rounds_elapsed=acc.max_rounds)
    assert accountant_tick(at).warning


def test_accountant_warning_round():
    acc = PrivacyAccountant(PrivacyParams(0.3, 1.0, 3.0))
    first = None
    for r in range(1, 2001):
        acc = acc.tick()
        if acc.warning and first is None:
            first = r
    assert first == 546
    assert acc.breach_round == 546
    assert acc.epsilon_spent == pytest.approx(2000 * 0.3)


def test_accountant_modes():
    params = PrivacyParams(0.3, 1.0, 3.0)
    assert PrivacyAccountant(params).charge_per_round == pytest.approx(0.3)
    strict = PrivacyAccountant(params, mode="strict")
    assert strict.charge_per_round == pytest.approx(0.6)
    assert strict.max_rounds == round_bound(0.6, 3.0)
    with pytest.raises(PrivacyParameterError):
        PrivacyAccountant(params, mode="loose")
