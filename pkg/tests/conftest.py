"""Shared fixtures and brute-force reference implementations.

The reference helpers here work on plain dicts through ``model.topple`` and
share no code with the bit-packed oracle, so they serve as an independent
check of it on small instances.
"""

from __future__ import annotations

import functools
import itertools
from collections import deque

import pytest
from hypothesis import assume
from hypothesis import strategies as st

from sasm import builders, jsonio, oracle
from sasm.model import Configuration, SandpileSpec, closed_traps, topple, unstable_sites


def naive_outcomes(spec: SandpileSpec, config: Configuration) -> frozenset[Configuration]:
    """Stable configurations reachable by any toppling order and rule choice."""
    seen = {config}
    stack = [config]
    found = set()
    while stack:
        c = stack.pop()
        unstable = unstable_sites(spec, c)
        if not unstable:
            found.add(c)
            continue
        for v in unstable:
            for i in range(len(spec.rules[v])):
                nxt, _ = topple(spec, c, v, i)
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
    return frozenset(found)


def naive_recurrent(spec: SandpileSpec, batch: int = 1) -> frozenset[Configuration]:
    """Closure of c_max under adding up to ``batch`` particles, then stabilizing."""
    start = Configuration.c_max(spec)
    members = {start}
    queue = deque([start])
    additions = [
        combo
        for size in range(1, batch + 1)
        for combo in itertools.combinations_with_replacement(spec.sites, size)
    ]
    while queue:
        m = queue.popleft()
        for combo in additions:
            c = m
            for v in combo:
                c = c.add(v)
            for out in naive_outcomes(spec, c):
                if out not in members:
                    members.add(out)
                    queue.append(out)
    return frozenset(members)


def chaotic_flush(spec, rng):
    """Flush one randomly chosen eligible site at a time until none is left."""
    flushed = set()
    while True:
        eligible = [
            v for v in spec.sites
            if v not in flushed and any(set(t) <= flushed for t in spec.rules[v])
        ]
        if not eligible:
            return frozenset(flushed)
        flushed.add(rng.choice(eligible))


def all_stable(spec: SandpileSpec):
    ranges = [range(spec.capacity[v]) for v in spec.sites]
    for values in itertools.product(*ranges):
        yield Configuration(dict(zip(spec.sites, values)))


@functools.lru_cache(maxsize=None)
def _recurrent_cached(doc: str, witnesses: bool):
    return oracle.recurrent_stable_set(jsonio.parse_spec(doc), witnesses=witnesses)


def recurrent(spec: SandpileSpec, witnesses: bool = True):
    """Oracle recurrent set, memoized across the whole test session."""
    return _recurrent_cached(jsonio.serialize(spec), witnesses)


@pytest.fixture(scope="session")
def corpus():
    return builders.random_corpus(200)


@pytest.fixture(scope="session")
def manna4_recurrent():
    return recurrent(builders.grid_ns_ew(4, 4), witnesses=False)


@st.composite
def specs(draw, max_sites=5, max_capacity=2, max_rules=2, allow_traps=False):
    """Valid sandpiles; by default without closed sink-free traps."""
    n = draw(st.integers(1, max_sites))
    sites = [f"v{k}" for k in range(n)]
    capacity, rules = {}, {}
    for v in sites:
        cap = draw(st.integers(1, max_capacity))
        others = [u for u in sites if u != v]
        target = st.sampled_from(others) if others else st.nothing()
        rule = st.lists(target, min_size=0, max_size=cap if others else 0)
        capacity[v] = cap
        rules[v] = draw(st.lists(rule, min_size=1, max_size=max_rules))
    spec = SandpileSpec("drawn", tuple(sites), capacity, rules)
    if not allow_traps:
        assume(not closed_traps(spec))
    return spec


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
