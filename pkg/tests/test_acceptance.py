"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Games shared between criteria are played once per module and reused; the
structural-invariant sweep inspects every game played here.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from dpdeception.defender import AttackEstimate, DefenderBudget, deploy_equal
from dpdeception.engine import AttackerStrategy, DefenderStrategy, play_game
from dpdeception.experiments import has_plateau, monotone_within, run_scenario, scenario, window_mean
from dpdeception.mechanisms import PrivacyParams
from dpdeception.model import build_network
from dpdeception.verify import loss_checks, mechanism_checks, uniform_attack_bound

pytestmark = pytest.mark.slow

DP, GREEDY, MIXED = DefenderStrategy.DP_BASED, DefenderStrategy.GREEDY, DefenderStrategy.GREEDY_MIXED
BAYES, VALUE = AttackerStrategy.BAYESIAN, AttackerStrategy.VALUE_AGENT
SEEDS = 10


@pytest.fixture(scope="module")
def s1_games():
    """Every defender against every attacker at 100 hosts / 10 configurations."""
    spec = scenario("s1", repetitions=SEEDS)
    start = time.perf_counter()
    games = {
        (d, a): [play_game(spec.game_config(100, d, a, rep)) for rep in range(SEEDS)]
        for d in DefenderStrategy
        for a in AttackerStrategy
    }
    return games, time.perf_counter() - start


@pytest.fixture(scope="module")
def trend_sweeps():
    start = time.perf_counter()
    s3 = run_scenario(scenario("s3", defenders=(DP,), attackers=(BAYES,)))
    s4 = run_scenario(scenario("s4", defenders=(DP,), attackers=(BAYES,)))
    long_spec = scenario("s4rounds", defenders=(DP,), attackers=(BAYES,))
    long_games = [play_game(long_spec.game_config(3000, DP, BAYES, rep)) for rep in range(SEEDS)]
    return s3, s4, long_games, time.perf_counter() - start


def _mean_gain(games):
    return float(np.mean([g.mean_attacker_gain for g in games]))


def _mean_cost(games):
    return float(np.mean([g.mean_defender_cost for g in games]))


def test_criterion_1_mechanisms(report):
    start = time.perf_counter()
    checks = mechanism_checks()
    elapsed = time.perf_counter() - start
    passed = all(c.passed for c in checks) and elapsed < 60
    detail = "; ".join(f"{c.name} {'ok' if c.passed else 'FAILED'} ({c.detail})" for c in checks)
    report("1", passed, f"{detail}; {elapsed:.1f}s")
    assert passed


def test_criterion_2_loss_oracles(report):
    start = time.perf_counter()
    checks = [c for c in loss_checks(100_000) if c.name.startswith("loss-")]
    elapsed = time.perf_counter() - start
    passed = all(c.passed for c in checks) and elapsed < 120
    detail = "; ".join(f"{c.name}: {c.detail}" for c in checks)
    report("2", passed, f"{detail}; {elapsed:.1f}s")
    assert passed


def test_criterion_3_uniform_attack_gain(report):
    passed, detail = uniform_attack_bound()
    report("3", passed, detail)
    assert passed


def test_criterion_4_scenario1_relative(report, s1_games):
    games, elapsed = s1_games
    dp_gain, dp_cost = _mean_gain(games[DP, BAYES]), _mean_cost(games[DP, BAYES])
    g_gain, g_cost = _mean_gain(games[GREEDY, BAYES]), _mean_cost(games[GREEDY, BAYES])
    m_gain, m_cost = _mean_gain(games[MIXED, BAYES]), _mean_cost(games[MIXED, BAYES])
    below_greedy = (g_gain - dp_gain) / abs(g_gain)
    below_mixed = (m_gain - dp_gain) / abs(m_gain)
    above_greedy = (dp_cost - g_cost) / abs(g_cost)
    above_mixed = (dp_cost - m_cost) / abs(m_cost)
    parts = {
        "gain below Greedy in [15%, 45%]": 0.15 <= below_greedy <= 0.45,
        "gain below Greedy-Mixed in [2%, 25%]": 0.02 <= below_mixed <= 0.25,
        "cost above Greedy in [0%, 15%]": 0.0 <= above_greedy <= 0.15,
        "cost above Greedy-Mixed in [0%, 15%]": 0.0 <= above_mixed <= 0.15,
        "runtime < 10 min": elapsed < 600,
    }
    passed = all(parts.values())
    report("4", passed,
           f"gains DP {dp_gain:.2f}, Greedy {g_gain:.2f}, Mixed {m_gain:.2f}; costs DP {dp_cost:.2f}, "
           f"Greedy {g_cost:.2f}, Mixed {m_cost:.2f}; below Greedy {below_greedy:.1%}, below Mixed "
           f"{below_mixed:.1%}, cost above Greedy {above_greedy:.1%}, above Mixed {above_mixed:.1%}; "
           f"failed: {[k for k, v in parts.items() if not v] or 'none'}; {elapsed:.0f}s")
    assert passed


def test_criterion_5_plateaus(report, s1_games):
    games, _ = s1_games
    greedy_hits = sum(has_plateau(g.gains) for g in games[GREEDY, BAYES])
    dp_clean = sum(not has_plateau(g.gains) for g in games[DP, BAYES])
    passed = greedy_hits > SEEDS // 2 and dp_clean > SEEDS // 2
    report("5", passed, f"Greedy series with a plateau: {greedy_hits}/{SEEDS}; "
                        f"DP series without one: {dp_clean}/{SEEDS}")
    assert passed


def test_criterion_6_learning_attacker(report, s1_games):
    games, _ = s1_games
    late = [
        (window_mean(v.gains, -200, None), window_mean(b.gains, -200, None))
        for v, b in zip(games[GREEDY, VALUE], games[GREEDY, BAYES])
    ]
    wins = sum(v > b for v, b in late)
    va_dp, bayes_dp = _mean_gain(games[DP, VALUE]), _mean_gain(games[DP, BAYES])
    gap = abs(va_dp - bayes_dp) / max(abs(va_dp), abs(bayes_dp))
    passed = wins >= 7 and gap < 0.10
    report("6", passed,
           f"value agent beats Bayesian late vs Greedy in {wins}/{SEEDS} seeds "
           f"(late means value {np.mean([v for v, _ in late]):.1f}, Bayesian {np.mean([b for _, b in late]):.1f}); "
           f"vs DP means value {va_dp:.2f}, Bayesian {bayes_dp:.2f}, relative gap {gap:.1%}")
    assert passed


def test_criterion_7_trends(report, trend_sweeps):
    s3, s4, long_games, elapsed = trend_sweeps
    s3_rows = [s3.row(v, DP, BAYES) for v in s3.spec.sweep]
    s4_rows = [s4.row(v, DP, BAYES) for v in s4.spec.sweep]
    s3_means = [r.mean_gain for r in s3_rows]
    s4_means = [r.mean_gain for r in s4_rows]
    s3_ok = monotone_within(s3_means, [r.std_gain for r in s3_rows], increasing=False) and s3_means[-1] < s3_means[0]
    s4_ok = monotone_within(s4_means, [r.std_gain for r in s4_rows], increasing=True)
    early = float(np.mean([window_mean(g.gains, 0, 1000) for g in long_games]))
    late = float(np.mean([window_mean(g.gains, 2000, 3000) for g in long_games]))
    creep_ok = late > early
    passed = s3_ok and s4_ok and creep_ok
    report("7", passed,
           f"budget sweep {'ok' if s3_ok else 'FAILED'} (means {[round(m, 2) for m in s3_means]}); "
           f"epsilon sweep {'ok' if s4_ok else 'FAILED'} (means {[round(m, 2) for m in s4_means]}); "
           f"long run {'ok' if creep_ok else 'FAILED'} (rounds 0-1000 {early:.2f}, 2000-3000 {late:.2f}); "
           f"{elapsed:.0f}s")
    assert passed


def _deploy_seconds(n, repeats=15):
    rng = np.random.default_rng(n)
    net = build_network(n, 10, (1, 20), rng)
    est = AttackEstimate.uniform(10)
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        deploy_equal(net, list(net.real_counts), est, DefenderBudget(1e9), PrivacyParams(), rng)
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def test_criterion_8_complexity(report):
    _deploy_seconds(100)  # warm caches
    t = {n: _deploy_seconds(n) for n in (100, 200, 400)}
    ratios = [t[200] / t[100], t[400] / t[200]]
    passed = all(r <= 4.5 for r in ratios)
    report("8", passed, f"median deploy time {', '.join(f'N={n}: {s * 1e3:.2f} ms' for n, s in t.items())}; "
                        f"doubling ratios {ratios[0]:.2f}, {ratios[1]:.2f}")
    assert passed


def test_criterion_9_invariants(report, s1_games, trend_sweeps):
    games, _ = s1_games
    s3, s4, long_games, _ = trend_sweeps
    played = [g for series in games.values() for g in series] + long_games
    violations = [v for g in played for v in g.violations] + s3.violations + s4.violations
    count = len(played) + sum(len(gs) for gs in s3.games.values()) + sum(len(gs) for gs in s4.games.values())
    passed = not violations
    report("9", passed, f"{count} games checked, {len(violations)} violations"
                        + (f"; first: {violations[0]}" if violations else ""))
    assert passed
