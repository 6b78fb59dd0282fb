"""Grid sandpiles and seeded random sandpiles.

Grid sites are named ``r{i}c{j}``, 1-indexed, with row 1 on the north edge.
Every grid site has capacity 2.  Rule templates are clipped to the grid, and
neighbours that fall off the grid become sink losses.
"""

from __future__ import annotations

import random

from .errors import InvalidDimensions
from .model import SandpileSpec, closed_traps

NORTH, SOUTH, EAST, WEST = (-1, 0), (1, 0), (0, 1), (0, -1)

NS_EW_TEMPLATES = ((NORTH, SOUTH), (EAST, WEST))
NE_SW_TEMPLATES = ((NORTH, EAST), (SOUTH, WEST))


def site_name(row: int, col: int) -> str:
    return f"r{row}c{col}"


def parse_site_name(site: str) -> tuple[int, int]:
    row, col = site[1:].split("c")
    return int(row), int(col)


def grid_spec(name: str, rows: int, cols: int, templates, capacity: int = 2) -> SandpileSpec:
    """Grid sandpile whose rules are the given neighbour templates, clipped."""
    if rows < 1 or cols < 1:
        raise InvalidDimensions(f"grid needs rows, cols >= 1, got {rows}x{cols}")
    sites = [site_name(i, j) for i in range(1, rows + 1) for j in range(1, cols + 1)]
    rules = {}
    for i in range(1, rows + 1):
        for j in range(1, cols + 1):
            rules[site_name(i, j)] = [
                [
                    site_name(i + di, j + dj)
                    for di, dj in template
                    if 1 <= i + di <= rows and 1 <= j + dj <= cols
                ]
                for template in templates
            ]
    return SandpileSpec(name, tuple(sites), {v: capacity for v in sites}, rules)


def grid_ns_ew(rows: int, cols: int) -> SandpileSpec:
    """Manna's model: topple to both vertical or both horizontal neighbours."""
    return grid_spec(f"ns-ew-{rows}x{cols}", rows, cols, NS_EW_TEMPLATES)


def grid_ne_sw(rows: int, cols: int) -> SandpileSpec:
    """Topple to the north and east neighbours, or to the south and west ones."""
    return grid_spec(f"ne-sw-{rows}x{cols}", rows, cols, NE_SW_TEMPLATES)


RANDOM_SCHEME = (
    "per site: C ~ U{1..max_capacity}; rule count ~ U{1..max_rules}; "
    "rule size ~ U{0..C}; targets drawn uniformly with replacement from the other sites; "
    "duplicate rules dropped; specs with a closed sink-free trap are redrawn unless allow_traps"
)


def random_spec(
    site_count: int,
    max_capacity: int = 2,
    max_rules: int = 2,
    seed: int = 0,
    allow_traps: bool = False,
) -> SandpileSpec:
    """Seeded random sandpile; same arguments give an identical spec.

    By default a spec containing a site set that particles can never leave
    (see :func:`sasm.model.closed_traps`) is rejected and redrawn from the
    same generator stream, so the sink is reachable from every site.
    """
    if site_count < 1 or max_capacity < 1 or max_rules < 1:
        raise ValueError("site_count, max_capacity and max_rules must be >= 1")
    rng = random.Random(seed)
    width = len(str(site_count))
    sites = [f"s{k:0{width}d}" for k in range(1, site_count + 1)]
    attempts = 0
    while True:
        attempts += 1
        capacity, rules = {}, {}
        for v in sites:
            cap = rng.randint(1, max_capacity)
            others = [u for u in sites if u != v]
            rule_list = []
            for _ in range(rng.randint(1, max_rules)):
                size = rng.randint(0, cap) if others else 0
                rule_list.append([rng.choice(others) for _ in range(size)])
            capacity[v] = cap
            rules[v] = rule_list
        metadata = {
            "generator": {
                "seed": seed,
                "scheme": RANDOM_SCHEME,
                "site_count": site_count,
                "max_capacity": max_capacity,
                "max_rules": max_rules,
                "attempts": attempts,
            }
        }
        spec = SandpileSpec(f"random-{site_count}-{seed}", tuple(sites), capacity, rules, metadata)
        if allow_traps or not closed_traps(spec):
            return spec


def random_corpus(count: int = 200, max_sites: int = 5, max_capacity: int = 2,
                  max_rules: int = 2, seed: int = 0) -> list[SandpileSpec]:
    """``count`` specs with site counts cycling through 1..max_sites."""
    return [
        random_spec(1 + k % max_sites, max_capacity, max_rules, seed=seed * 100_003 + k)
        for k in range(count)
    ]
