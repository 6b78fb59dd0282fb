import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sasm.builders import grid_ne_sw, grid_ns_ew, random_spec
from sasm.errors import InvalidRuleIndex, StepBudgetExhausted, ToppleAtStableSite
from sasm.model import (
    Configuration,
    SandpileSpec,
    first_site_policy,
    is_stable,
    stabilize,
    topple,
    unstable_sites,
    validate,
)

from .conftest import naive_outcomes, specs


def conf(spec, **heights):
    return Configuration.from_sparse(spec, heights)


def test_validate_clean_grid():
    report = validate(grid_ns_ew(2, 2))
    assert report.ok and not report.warnings


def test_validate_rule_exceeds_capacity():
    spec = SandpileSpec("bad", ("a", "b"), {"a": 2, "b": 1}, {"a": [["b", "b", "b"]], "b": [[]]})
    kinds = [v.kind for v in validate(spec).errors]
    assert kinds == ["rule exceeds capacity"]


def test_validate_unknown_site_in_rule():
    spec = SandpileSpec("bad", ("a",), {"a": 2}, {"a": [["zz"]]})
    assert [v.kind for v in validate(spec).errors] == ["unknown site in rule"]


def test_validate_self_delivery_and_capacity():
    spec = SandpileSpec("bad", ("a", "b"), {"a": 2, "b": 0}, {"a": [["a"]], "b": [[]]})
    kinds = {v.kind for v in validate(spec).errors}
    assert kinds == {"self-delivery", "nonpositive capacity"}


def test_validate_warns_on_closed_trap():
    spec = SandpileSpec("loop", ("a", "b"), {"a": 1, "b": 1}, {"a": [["b"]], "b": [["a"]]})
    report = validate(spec)
    assert report.ok
    assert [w.kind for w in report.warnings] == ["potential non-terminating stabilization branch"]


def test_validate_no_warning_when_escape_exists():
    spec = SandpileSpec("loop", ("a", "b"), {"a": 1, "b": 1}, {"a": [["b"]], "b": [["a"], []]})
    assert not validate(spec).warnings


def test_rules_deduplicated_as_multisets():
    spec = SandpileSpec("d", ("a", "b", "c"), {"a": 2, "b": 1, "c": 1},
                        {"a": [["c", "b"], ["b", "c"], ["b", "b"]], "b": [[]], "c": [[]]})
    assert spec.rules["a"] == (("b", "c"), ("b", "b"))


def test_stability():
    spec = grid_ns_ew(2, 2)
    assert is_stable(spec, Configuration.c_max(spec))
    assert is_stable(spec, Configuration.empty(spec))
    c = conf(spec, r1c1=2)
    assert not is_stable(spec, c)
    assert unstable_sites(spec, c) == ("r1c1",)


@pytest.mark.parametrize(
    "spec, start, site, rule, expected, loss",
    [
        (grid_ns_ew(2, 2), {"r1c1": 2}, "r1c1", 0, {"r2c1": 1}, 1),
        (grid_ns_ew(3, 3), {"r2c2": 2}, "r2c2", 1, {"r2c1": 1, "r2c3": 1}, 0),
        (grid_ne_sw(2, 2), {"r2c1": 2}, "r2c1", 1, {}, 2),
    ],
)
def test_topple_examples(spec, start, site, rule, expected, loss):
    new, event = topple(spec, conf(spec, **start), site, rule)
    assert new == conf(spec, **expected)
    assert event.sink_loss == loss
    assert event.site == site and event.rule_index == rule


def test_topple_errors():
    spec = grid_ns_ew(2, 2)
    with pytest.raises(ToppleAtStableSite):
        topple(spec, conf(spec, r1c1=1), "r1c1", 0)
    with pytest.raises(InvalidRuleIndex):
        topple(spec, conf(spec, r1c1=2), "r1c1", 5)


def test_stabilize_examples():
    spec = grid_ns_ew(2, 2)
    cmax = Configuration.c_max(spec)
    assert stabilize(spec, cmax) is cmax
    assert stabilize(spec, conf(spec, r1c1=2), first_site_policy(0)) == conf(spec, r2c1=1)


def test_stabilize_budget_reports_trail():
    spec = SandpileSpec("loop", ("a", "b"), {"a": 1, "b": 1}, {"a": [["b"]], "b": [["a"]]})
    with pytest.raises(StepBudgetExhausted) as info:
        stabilize(spec, conf(spec, a=1), max_steps=5, trail_length=3)
    assert len(info.value.trail) == 3


def test_deterministic_orders_agree():
    spec = random_spec(5, 2, 1, seed=11)
    start = Configuration.from_sparse(spec, {v: 2 for v in spec.sites[:3]})
    first = stabilize(spec, start, lambda c, u: (u[0], 0))
    last = stabilize(spec, start, lambda c, u: (u[-1], 0))
    assert first == last


@settings(max_examples=60, deadline=None)
@given(specs(), st.data())
def test_particle_accounting(spec, data):
    heights = {v: data.draw(st.integers(0, 3)) for v in spec.sites}
    c = Configuration(heights)
    for v in unstable_sites(spec, c):
        for i in range(len(spec.rules[v])):
            new, event = topple(spec, c, v, i)
            assert c.total - new.total == event.sink_loss >= 0


@settings(max_examples=60, deadline=None)
@given(specs(), st.data())
def test_stability_is_pointwise(spec, data):
    c = Configuration({v: data.draw(st.integers(0, 3)) for v in spec.sites})
    assert is_stable(spec, c) == (unstable_sites(spec, c) == ())


@settings(max_examples=25, deadline=None)
@given(specs(max_sites=4, max_rules=1), st.integers(0, 5), st.data())
def test_single_rule_confluence(spec, total, data):
    sites = data.draw(st.lists(st.sampled_from(spec.sites), min_size=total, max_size=total))
    c = Configuration.empty(spec)
    for v in sites:
        c = c.add(v)
    assert len(naive_outcomes(spec, c)) == 1


def test_configuration_equality_and_hash():
    spec = grid_ns_ew(2, 2)
    a = conf(spec, r1c1=1)
    b = Configuration({"r2c2": 0, "r2c1": 0, "r1c2": 0, "r1c1": 1})
    assert a == b and hash(a) == hash(b)
    assert len({a, b}) == 1
    with pytest.raises(ValueError):
        Configuration({"r1c1": -1})


def test_all_policies_same_for_small_deterministic_spec():
    spec = SandpileSpec("chain", ("a", "b", "c"), {"a": 2, "b": 2, "c": 1},
                        {"a": [["b", "c"]], "b": [["a"]], "c": [[]]})
    start = Configuration({"a": 3, "b": 2, "c": 0})
    results = set()
    for perm in itertools.permutations(range(3)):
        order = [spec.sites[k] for k in perm]
        results.add(stabilize(spec, start, lambda c, u: (min(u, key=order.index), 0)))
    assert len(results) == 1
