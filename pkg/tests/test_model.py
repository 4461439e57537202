import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpdeception.model import (
    ConfigurationCatalog,
    ConfigurationError,
    DeploymentPlan,
    NetworkSpec,
    Situation,
    build_network,
    observed_counts,
    top_utility_sum,
)


def test_build_network_shape():
    net = build_network(100, 10, (1, 20), np.random.default_rng(3))
    assert net.num_systems == 100
    assert net.num_configs == 10
    assert sum(net.real_counts) == 100
    assert all(1 <= u <= 20 for u in net.catalog.utilities)


def test_degenerate_utility_range():
    net = build_network(2, 2, (5, 5), np.random.default_rng(0))
    assert net.catalog.utilities == (5.0, 5.0)
    assert sum(net.real_counts) == 2


def test_real_counts_match_recount():
    net = build_network(50, 5, (1, 20), np.random.default_rng(42))
    recount = [0] * 5
    for h in net.hosts:
        recount[h.real_config] += 1
    assert list(net.real_counts) == recount
    assert sum(recount) == 50


@pytest.mark.parametrize(
    "n, k, rng_range",
    [(3, 4, (1, 20)), (5, 1, (1, 20)), (5, 2, (0, 20)), (5, 2, (3, 2))],
)
def test_build_network_rejects_bad_parameters(n, k, rng_range):
    with pytest.raises(ConfigurationError):
        build_network(n, k, rng_range, np.random.default_rng(0))


def test_host_utility_inherited_from_configuration():
    net = NetworkSpec.from_assignments([2.0, 7.0], [1, 0, 1])
    assert [h.utility for h in net.hosts] == [7.0, 2.0, 7.0]
    assert net.real_counts == (1, 2)


def test_mismatched_counts_rejected():
    net = NetworkSpec.from_assignments([2.0, 7.0], [1, 0, 1])
    with pytest.raises(ConfigurationError):
        NetworkSpec(net.hosts, net.catalog, real_counts=(2, 1))


def test_costs_follow_coefficients():
    cat = ConfigurationCatalog((4.0, 10.0))
    assert cat.obfuscation_cost(1, 0) == pytest.approx(1.0)
    assert cat.obfuscation_cost(1, 1) == 0.0
    assert cat.honeypot_cost(0) == pytest.approx(0.8)
    assert cat.offline_loss(1) == pytest.approx(1.5)


def test_costs_below_utility_by_default():
    cat = ConfigurationCatalog((1.0, 3.5, 20.0))
    for k, u in enumerate(cat.utilities):
        assert cat.honeypot_cost(k) < u
        assert cat.offline_loss(k) < u


def test_json_round_trip(tmp_path):
    net = build_network(12, 3, (1, 20), np.random.default_rng(9))
    path = tmp_path / "net.json"
    net.save(path)
    data = json.loads(path.read_text())
    assert set(data) >= {"num_systems", "num_configs", "utilities", "assignments"}
    assert NetworkSpec.load(path) == net


def test_from_dict_checks_declared_sizes():
    with pytest.raises(ConfigurationError):
        NetworkSpec.from_dict({"num_systems": 4, "utilities": [1.0, 2.0], "assignments": [0, 1, 1]})


def test_situation_from_totals():
    assert Situation.from_totals(5, 5) is Situation.EQUAL
    assert Situation.from_totals(6, 5) is Situation.HONEYPOT
    assert Situation.from_totals(4, 5) is Situation.OFFLINE


def test_observed_counts_worked_example():
    # s1 -> k2, s2 -> k3, s3 -> k1 and one honeypot shown as k1
    plan = DeploymentPlan({0: 1, 1: 2, 2: 0}, honeypots=((3, 0),), situation=Situation.HONEYPOT)
    assert observed_counts(plan, 3).tolist() == [2, 1, 1]


def test_observed_counts_empty_plan():
    assert observed_counts(DeploymentPlan({}), 4).tolist() == [0, 0, 0, 0]


@settings(max_examples=50, deadline=None)
@given(
    st.integers(2, 6).flatmap(
        lambda k: st.tuples(
            st.just(k),
            st.lists(st.integers(0, k - 1), min_size=k, max_size=40),
            st.lists(st.integers(0, k - 1), max_size=10),
            st.data(),
        )
    )
)
def test_observed_counts_conserve_items(case):
    k, assignments, hp_labels, data = case
    net = NetworkSpec.from_assignments([float(i + 1) for i in range(k)], assignments)
    offline = data.draw(st.sets(st.sampled_from(range(len(assignments)))))
    displayed = {h.id: data.draw(st.integers(0, k - 1)) for h in net.hosts if h.id not in offline}
    start = net.max_host_id + 1
    honeypots = tuple((start + i, lab) for i, lab in enumerate(hp_labels))
    counts = observed_counts(DeploymentPlan(displayed, honeypots, frozenset(offline)), k)
    assert counts.sum() == net.num_systems - len(offline) + len(honeypots)
    assert sum(net.real_counts) == net.num_systems


def test_validate_catches_overlap_and_gaps():
    net = NetworkSpec.from_assignments([1.0, 2.0], [0, 1, 1])
    good = DeploymentPlan({0: 0, 1: 1}, offline=frozenset({2}), situation=Situation.OFFLINE)
    good.validate(net, budget=1.0)
    with pytest.raises(AssertionError):
        DeploymentPlan({0: 0, 1: 1, 2: 0}, offline=frozenset({2}), situation=Situation.OFFLINE).validate(net)
    with pytest.raises(AssertionError):
        DeploymentPlan({0: 0, 1: 1}).validate(net)
    with pytest.raises(AssertionError):
        DeploymentPlan({0: 0, 1: 1, 2: 1}, honeypots=((1, 0),), situation=Situation.HONEYPOT).validate(net)
    with pytest.raises(AssertionError):
        DeploymentPlan({0: 0, 1: 1, 2: 1}, cost_spent=3.0).validate(net, budget=2.0)


def test_top_utility_sum():
    assert top_utility_sum([3, 9, 1, 7], 2) == 16
    assert top_utility_sum([3, 9], 0) == 0
    assert top_utility_sum([3, 9], 5) == 12
