"""Exhaustive recurrence oracle for small sandpiles.

Configurations are packed into Python integers with one fixed-width bit field
per site.  A field stores ``h + 2**(w-1) - C(v)``, so a site is unstable
exactly when the top bit of its field is set; a toppling or a particle
addition is a single integer addition.

The recurrent stable set is the set of stable configurations reachable from
``c_max`` by single-particle additions and topplings, with full branching over
which unstable site topples and which rule it uses.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
from scipy.optimize import linprog

from .errors import (
    BudgetExceeded,
    NotStable,
    ParticleCapExceeded,
    PotentialNonTermination,
    StateCapExceeded,
)
from .model import Configuration, SandpileSpec, SubConfiguration, check_paired, is_stable, topple
from .reduce import reduce

DEFAULT_STATE_CAP = 2**20


def default_particle_cap(spec: SandpileSpec) -> int:
    caps = [spec.capacity[v] for v in spec.sites]
    return sum(caps) + max(caps)


class StateCodec:
    """Bit-packed encoding of the configurations of one sandpile."""

    def __init__(self, spec: SandpileSpec, max_particles: int | None = None):
        self.spec = spec
        self.sites = spec.sites
        self.index = {v: k for k, v in enumerate(self.sites)}
        self.max_particles = default_particle_cap(spec) if max_particles is None else max_particles
        caps = [spec.capacity[v] for v in self.sites]
        self.width = max(self.max_particles, max(caps)).bit_length() + 1
        high = 1 << (self.width - 1)
        self.field_mask = (1 << self.width) - 1
        self.shift = [self.width * k for k in range(len(self.sites))]
        self.offset = [high - c for c in caps]
        self.capacity = caps
        self.high_mask = sum(high << s for s in self.shift)
        self.base = sum(o << s for o, s in zip(self.offset, self.shift))
        self.add = [1 << s for s in self.shift]
        self._site_of_bit = {s + self.width - 1: k for k, s in enumerate(self.shift)}
        self.deltas: list[list[int]] = []
        for k, v in enumerate(self.sites):
            row = []
            for t in spec.rules[v]:
                d = -(caps[k] << self.shift[k])
                for u in t:
                    d += 1 << self.shift[self.index[u]]
                row.append(d)
            self.deltas.append(row)

    def encode(self, config: Configuration) -> int:
        check_paired(self.spec, config)
        if config.total > self.max_particles:
            raise ParticleCapExceeded(
                f"{config.total} particles exceed the cap of {self.max_particles}"
            )
        x = self.base
        for k, v in enumerate(self.sites):
            x += config.heights[v] << self.shift[k]
        return x

    def heights(self, x: int) -> tuple[int, ...]:
        m = self.field_mask
        return tuple(((x >> s) & m) - o for s, o in zip(self.shift, self.offset))

    def decode(self, x: int) -> Configuration:
        return Configuration(dict(zip(self.sites, self.heights(x))))

    def unstable(self, x: int) -> Iterator[int]:
        bits = x & self.high_mask
        while bits:
            low = bits & -bits
            bits ^= low
            yield self._site_of_bit[low.bit_length() - 1]

    def is_stable(self, x: int) -> bool:
        return not x & self.high_mask

    def successors(self, x: int) -> Iterator[tuple[int, int, int]]:
        """(site index, rule index, next state) for every legal toppling."""
        for k in self.unstable(x):
            for r, d in enumerate(self.deltas[k]):
                yield k, r, x + d

    def pattern(self, sub: SubConfiguration) -> tuple[int, int] | None:
        """(mask, value) matching ``sub`` on stable states; None if it never can."""
        self.spec.require_sites(sub.heights)
        mask = value = 0
        for v, h in sub.heights.items():
            k = self.index[v]
            if h >= self.capacity[k]:
                return None
            mask |= self.field_mask << self.shift[k]
            value |= (h + self.offset[k]) << self.shift[k]
        return mask, value

    def c_max(self) -> int:
        return self.encode(Configuration.c_max(self.spec))


# --------------------------------------------------------------------------
# stabilization


@dataclass(frozen=True)
class StabilizationOutcomes:
    outcomes: frozenset[Configuration]
    cycle_flag: bool
    explored: int


def _reachable_stable(codec: StateCodec, start: int) -> tuple[set[int], bool, int]:
    """Depth-first search of toppling sequences from ``start``.

    Returns the stable states reached, whether some path revisits a state
    still on the current path, and the number of states explored.
    """
    on_path, done = set(), set()
    stable: set[int] = set()
    cycle = False
    stack = [(start, codec.successors(start))]
    on_path.add(start)
    while stack:
        x, succ = stack[-1]
        for _, _, y in succ:
            if y in on_path:
                cycle = True
            elif y not in done:
                on_path.add(y)
                stack.append((y, codec.successors(y)))
                break
        else:
            stack.pop()
            on_path.discard(x)
            done.add(x)
            if codec.is_stable(x):
                stable.add(x)
    return stable, cycle, len(done)


def stabilize_outcomes(
    spec: SandpileSpec, config: Configuration, max_particles: int | None = None
) -> StabilizationOutcomes:
    """Every stable configuration some toppling sequence from ``config`` reaches."""
    cap = max(config.total, default_particle_cap(spec)) if max_particles is None else max_particles
    codec = StateCodec(spec, cap)
    stable, cycle, explored = _reachable_stable(codec, codec.encode(config))
    return StabilizationOutcomes(frozenset(codec.decode(x) for x in stable), cycle, explored)


def conservative_cycle_possible(spec: SandpileSpec) -> bool:
    """False when no sequence of topplings can return to its start.

    A closed toppling cycle uses only sink-free rules and its toppling vectors
    sum to zero.  If no nonnegative, nonzero combination of sink-free toppling
    vectors vanishes (a linear feasibility problem), cycles are impossible.
    """
    index = {v: k for k, v in enumerate(spec.sites)}
    columns = []
    for v in spec.sites:
        for t in spec.rules[v]:
            if len(t) == spec.capacity[v]:
                col = np.zeros(len(spec.sites))
                col[index[v]] -= spec.capacity[v]
                for u in t:
                    col[index[u]] += 1
                columns.append(col)
    if not columns:
        return False
    a = np.column_stack(columns)
    a_eq = np.vstack([a, np.ones(a.shape[1])])
    b_eq = np.zeros(a_eq.shape[0])
    b_eq[-1] = 1.0
    res = linprog(np.zeros(a.shape[1]), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return res.status == 0


# --------------------------------------------------------------------------
# recurrent set


@dataclass(frozen=True)
class WitnessStep:
    add_at: str
    topplings: tuple[tuple[str, int], ...]

    def to_json(self) -> dict:
        return {
            "add_at": self.add_at,
            "topplings": [{"site": s, "rule_index": r} for s, r in self.topplings],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "WitnessStep":
        return cls(doc["add_at"], tuple((t["site"], t["rule_index"]) for t in doc["topplings"]))


class RecurrentSet:
    """Stable configurations reachable from ``c_max``, with witness links."""

    def __init__(self, spec, codec, members, parent, stats, cycle_flag):
        self.spec = spec
        self.codec = codec
        self._members = members
        self._parent = parent
        self.stats = stats
        self.cycle_flag = cycle_flag

    def __len__(self):
        return len(self._members)

    def __contains__(self, config: Configuration) -> bool:
        return self.codec.encode(config) in self._members

    def __iter__(self) -> Iterator[Configuration]:
        return iter(self.configurations())

    @property
    def stable_count(self) -> int:
        return self.stats["stable"]

    @property
    def is_everything(self) -> bool:
        return len(self) == self.stable_count

    def configurations(self) -> list[Configuration]:
        return [self.codec.decode(x) for x in sorted(self._members, key=self.codec.heights)]

    def height_tuples(self) -> list[tuple[int, ...]]:
        return sorted(self.codec.heights(x) for x in self._members)

    def matches(self, sub: SubConfiguration) -> bool:
        pattern = self.codec.pattern(sub)
        if pattern is None:
            return False
        mask, value = pattern
        return any(x & mask == value for x in self._members)

    def witness(self, config: Configuration) -> list[WitnessStep] | None:
        """Additions and topplings leading from ``c_max`` to ``config``."""
        if self._parent is None:
            raise ValueError("recurrent set was built without witness links")
        x = self.codec.encode(config)
        if x not in self._members:
            return None
        path = [x]
        while self._parent[path[-1]] is not None:
            path.append(self._parent[path[-1]])
        path.reverse()
        steps: list[WitnessStep] = []
        add_at, topplings = None, []
        codec = self.codec
        for a, b in zip(path, path[1:]):
            if codec.is_stable(a):
                if add_at is not None:
                    steps.append(WitnessStep(add_at, tuple(topplings)))
                k = codec.add.index(b - a)
                add_at, topplings = codec.sites[k], []
            else:
                k, r = next((k, r) for k, r, y in codec.successors(a) if y == b)
                topplings.append((codec.sites[k], r))
        if add_at is not None:
            steps.append(WitnessStep(add_at, tuple(topplings)))
        return steps

    def header(self) -> dict:
        return {
            "members": len(self),
            "stable": self.stable_count,
            "nodes": self.stats["nodes"],
            "transitions": self.stats["transitions"],
            "cycle": self.cycle_flag,
        }


def stable_state_count(spec: SandpileSpec) -> int:
    return math.prod(spec.capacity[v] for v in spec.sites)


def recurrent_stable_set(
    spec: SandpileSpec,
    max_states: int = DEFAULT_STATE_CAP,
    max_particles: int | None = None,
    witnesses: bool = True,
    raise_on_cycle: bool = False,
) -> RecurrentSet:
    """Breadth-first closure of ``c_max`` under particle addition and toppling.

    One search covers the whole state graph: stable states branch on every
    single-particle addition, unstable states on every (site, rule) toppling.
    Each stable state reached is recurrent.  ``witnesses=False`` keeps only a
    visited set, roughly halving memory on large instances.
    """
    stable_total = stable_state_count(spec)
    if stable_total > max_states:
        raise StateCapExceeded(f"{stable_total} stable states exceed the cap of {max_states}")
    codec = StateCodec(spec, max_particles)
    start = codec.c_max()
    parent: dict[int, int | None] | set[int]
    if witnesses:
        parent = {start: None}
    else:
        parent = {start}
    members: set[int] = set()
    queue = deque([start])
    transitions = 0
    high, adds, deltas = codec.high_mask, codec.add, codec.deltas
    site_of_bit = codec._site_of_bit
    while queue:
        x = queue.popleft()
        bits = x & high
        if not bits:
            members.add(x)
            nxt = [x + a for a in adds]
        else:
            nxt = []
            while bits:
                low = bits & -bits
                bits ^= low
                nxt.extend(x + d for d in deltas[site_of_bit[low.bit_length() - 1]])
        transitions += len(nxt)
        for y in nxt:
            if y not in parent:
                if witnesses:
                    parent[y] = x
                else:
                    parent.add(y)
                queue.append(y)

    cycle = False
    if conservative_cycle_possible(spec):
        cycle = _has_toppling_cycle(codec, parent)
    if cycle and raise_on_cycle:
        raise PotentialNonTermination("some toppling sequence revisits a configuration")
    stats = {"stable": stable_total, "nodes": len(parent), "transitions": transitions}
    return RecurrentSet(
        spec, codec, frozenset(members), parent if witnesses else None, stats, cycle
    )


def _has_toppling_cycle(codec: StateCodec, nodes: Iterable[int]) -> bool:
    done: set[int] = set()
    for root in nodes:
        if root in done or codec.is_stable(root):
            continue
        on_path = {root}
        stack = [(root, codec.successors(root))]
        while stack:
            x, succ = stack[-1]
            for _, _, y in succ:
                if y in on_path:
                    return True
                if y not in done:
                    on_path.add(y)
                    stack.append((y, codec.successors(y)))
                    break
            else:
                stack.pop()
                on_path.discard(x)
                done.add(x)
    return False


# --------------------------------------------------------------------------
# queries


@dataclass(frozen=True)
class RecurrenceAnswer:
    recurrent: bool
    witness: tuple[WitnessStep, ...] | None

    def __bool__(self):
        return self.recurrent

    def to_json(self) -> dict:
        doc: dict = {"recurrent": self.recurrent}
        if self.witness is not None:
            doc["witness"] = [step.to_json() for step in self.witness]
        return doc


def is_recurrent(
    spec: SandpileSpec, config: Configuration, recurrent: RecurrentSet | None = None, **caps
) -> RecurrenceAnswer:
    check_paired(spec, config)
    if not is_stable(spec, config):
        raise NotStable("recurrence is only decided for stable configurations")
    recurrent = recurrent or recurrent_stable_set(spec, **caps)
    if config not in recurrent:
        return RecurrenceAnswer(False, None)
    if recurrent._parent is None:
        return RecurrenceAnswer(True, None)
    return RecurrenceAnswer(True, tuple(recurrent.witness(config)))


def replay_witness(spec: SandpileSpec, chain: Iterable[WitnessStep]) -> Configuration:
    """Apply a witness chain to ``c_max`` with :func:`sasm.model.topple`."""
    config = Configuration.c_max(spec)
    for step in chain:
        config = config.add(step.add_at)
        for site, rule_index in step.topplings:
            config, _ = topple(spec, config, site, rule_index)
    return config


def is_forbidden(
    spec: SandpileSpec, sub: SubConfiguration, recurrent: RecurrentSet | None = None, **caps
) -> bool:
    """True iff no recurrent stable configuration equals ``sub`` on its region."""
    spec.require_sites(sub.heights)
    recurrent = recurrent or recurrent_stable_set(spec, witnesses=False, **caps)
    return not recurrent.matches(sub)


def enumerate_minimal_fscs(
    spec: SandpileSpec,
    max_region: int,
    recurrent: RecurrentSet | None = None,
    max_candidates: int = 1_000_000,
    **caps,
) -> list[SubConfiguration]:
    """All forbidden stable assignments on regions of at most ``max_region``
    sites whose every one-site-smaller restriction is allowed."""
    sites = spec.sites
    max_region = min(max_region, len(sites))
    caps_by_index = [spec.capacity[v] for v in sites]
    candidates = sum(
        math.prod(caps_by_index[k] for k in region)
        for size in range(1, max_region + 1)
        for region in itertools.combinations(range(len(sites)), size)
    )
    if candidates > max_candidates:
        raise BudgetExceeded(f"{candidates} candidate assignments exceed {max_candidates}")
    recurrent = recurrent or recurrent_stable_set(spec, witnesses=False, **caps)
    rows = recurrent.height_tuples()
    seen: dict[tuple[int, ...], set[tuple[int, ...]]] = {(): {()}}

    def allowed(region):
        if region not in seen:
            seen[region] = {tuple(row[k] for k in region) for row in rows}
        return seen[region]

    found = []
    for size in range(1, max_region + 1):
        for region in itertools.combinations(range(len(sites)), size):
            present = allowed(region)
            for values in itertools.product(*(range(caps_by_index[k]) for k in region)):
                if values in present:
                    continue
                if all(
                    values[:i] + values[i + 1 :] in allowed(region[:i] + region[i + 1 :])
                    for i in range(size)
                ):
                    found.append(SubConfiguration(dict(zip((sites[k] for k in region), values))))
    return found


def minimal_irreducible_subsandpiles(
    spec: SandpileSpec, containing: str | None = None, max_sites: int = 20
) -> list[frozenset[str]]:
    """Site sets whose restriction is minimal irreducible.

    Those are exactly the inclusion-minimal nonempty irreducible site sets.
    Every irreducible set lies inside the REDUCE residual, so only subsets of
    the residual are searched, smallest first, skipping supersets of sets
    already found.
    """
    if containing is not None:
        spec.require_sites([containing])
    pool = sorted(reduce(spec).residual)
    if len(pool) > max_sites:
        raise BudgetExceeded(f"{len(pool)} candidate sites exceed the budget of {max_sites}")
    bit = {v: 1 << k for k, v in enumerate(pool)}
    rule_masks = [
        [sum(bit.get(u, 0) for u in set(t)) for t in spec.rules[v]] for v in pool
    ]
    found: list[int] = []
    for size in range(1, len(pool) + 1):
        for combo in itertools.combinations(range(len(pool)), size):
            mask = sum(1 << k for k in combo)
            if any(m & mask == m for m in found):
                continue
            if all(r & mask for k in combo for r in rule_masks[k]):
                found.append(mask)
    result = [frozenset(v for v in pool if bit[v] & m) for m in found]
    if containing is not None:
        result = [s for s in result if containing in s]
    return sorted(result, key=lambda s: (len(s), sorted(s)))
