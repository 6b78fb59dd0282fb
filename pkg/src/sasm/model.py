"""Core data model for stochastic abelian sandpiles.

A sandpile is described by its ordinary sites, a capacity per site and, per
site, a list of toppling rules.  A rule is a multiset of ordinary sites, each
receiving one particle per occurrence when the owning site topples.  The sink
is never named: a toppling at ``v`` with rule ``t`` sends ``C(v) - |t|``
particles to it.

All values here are immutable.  Sites are strings and are always iterated in
lexicographic order.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Sequence

from .errors import InvalidRuleIndex, StepBudgetExhausted, ToppleAtStableSite, UnknownSite

Rule = tuple[str, ...]


def _freeze(mapping: Mapping) -> Mapping:
    return MappingProxyType(dict(sorted(mapping.items())))


def _dedupe_rules(rules: Iterable[Iterable[str]]) -> tuple[Rule, ...]:
    seen: list[Rule] = []
    for rule in rules:
        canon = tuple(sorted(rule))
        if canon not in seen:
            seen.append(canon)
    return tuple(seen)


@dataclass(frozen=True, eq=False)
class SandpileSpec:
    """Sites, capacities and toppling rules of a sandpile.

    Construction normalizes but does not validate: rule multisets are sorted,
    rule lists lose duplicate multisets (first occurrence wins, so rule
    indices follow the order the caller gave), and sites are sorted.  Use
    :func:`validate` to check the structural invariants.
    """

    name: str
    sites: tuple[str, ...]
    capacity: Mapping[str, int]
    rules: Mapping[str, tuple[Rule, ...]]
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(sorted(set(self.sites))))
        object.__setattr__(self, "capacity", _freeze(self.capacity))
        object.__setattr__(
            self, "rules", _freeze({v: _dedupe_rules(ts) for v, ts in self.rules.items()})
        )
        object.__setattr__(self, "metadata", MappingProxyType(dict(self.metadata)))

    def _key(self):
        return (
            self.name,
            self.sites,
            tuple(self.capacity.items()),
            tuple(self.rules.items()),
        )

    def __eq__(self, other):
        if not isinstance(other, SandpileSpec):
            return NotImplemented
        return self._key() == other._key() and dict(self.metadata) == dict(other.metadata)

    def __hash__(self):
        return hash(self._key())

    def __len__(self):
        return len(self.sites)

    def sink_loss(self, site: str, rule_index: int) -> int:
        return self.capacity[site] - len(self.rules[site][rule_index])

    def require_sites(self, sites: Iterable[str]) -> None:
        missing = sorted(set(sites) - set(self.sites))
        if missing:
            raise UnknownSite(f"unknown sites: {', '.join(missing)}")


class _HeightMap:
    """Shared behaviour of full and partial height assignments."""

    __slots__ = ("heights", "_hash")

    def __init__(self, heights: Mapping[str, int]):
        for site, h in heights.items():
            if not isinstance(h, int) or isinstance(h, bool) or h < 0:
                raise ValueError(f"height at {site!r} must be a natural number, got {h!r}")
        self.heights = _freeze(heights)
        self._hash = hash(tuple(self.heights.items()))

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.heights == other.heights

    def __hash__(self):
        return self._hash

    def __getitem__(self, site: str) -> int:
        return self.heights[site]

    def __repr__(self):
        body = ", ".join(f"{k}:{v}" for k, v in self.heights.items())
        return f"{type(self).__name__}({{{body}}})"

    @property
    def total(self) -> int:
        return sum(self.heights.values())

    def nonzero(self) -> dict[str, int]:
        return {k: v for k, v in self.heights.items() if v}


class Configuration(_HeightMap):
    """Total map from the sites of a sandpile to particle counts."""

    __slots__ = ()

    @classmethod
    def empty(cls, spec: SandpileSpec) -> "Configuration":
        return cls({v: 0 for v in spec.sites})

    @classmethod
    def c_max(cls, spec: SandpileSpec) -> "Configuration":
        return cls({v: spec.capacity[v] - 1 for v in spec.sites})

    @classmethod
    def from_sparse(cls, spec: SandpileSpec, heights: Mapping[str, int]) -> "Configuration":
        spec.require_sites(heights)
        full = {v: 0 for v in spec.sites}
        full.update(heights)
        return cls(full)

    def add(self, site: str, count: int = 1) -> "Configuration":
        heights = dict(self.heights)
        heights[site] += count
        return Configuration(heights)

    def restrict(self, region: Iterable[str]) -> "SubConfiguration":
        return SubConfiguration({v: self.heights[v] for v in region})

    def matches(self, sub: "SubConfiguration") -> bool:
        return all(self.heights.get(v) == h for v, h in sub.heights.items())


class SubConfiguration(_HeightMap):
    """Height assignment on a region of sites."""

    __slots__ = ()

    def __init__(self, heights: Mapping[str, int]):
        if not heights:
            raise ValueError("a sub-configuration needs a nonempty region")
        super().__init__(heights)

    @property
    def region(self) -> frozenset[str]:
        return frozenset(self.heights)

    @classmethod
    def zeros(cls, region: Iterable[str]) -> "SubConfiguration":
        return cls({v: 0 for v in region})


@dataclass(frozen=True)
class ToppleEvent:
    site: str
    rule_index: int
    sink_loss: int


def check_paired(spec: SandpileSpec, config: Configuration) -> None:
    if tuple(config.heights) != spec.sites:
        raise UnknownSite("configuration sites do not match the sandpile sites")


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str
    site: str | None
    detail: str

    def __str__(self):
        where = f" at {self.site}" if self.site is not None else ""
        return f"{self.kind}{where}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[Violation, ...] = ()
    warnings: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_json(self) -> dict:
        def enc(items):
            return [{"kind": x.kind, "site": x.site, "detail": x.detail} for x in items]

        return {"ok": self.ok, "errors": enc(self.errors), "warnings": enc(self.warnings)}


def closed_traps(spec: SandpileSpec) -> frozenset[str]:
    """Largest site set from which no rule choice ever loses a particle.

    Every rule of every site in the returned set is sink-free and delivers
    only inside the set, so particles entering it can never reach the sink.
    """
    trap = set(v for v in spec.sites if v in spec.rules and v in spec.capacity)
    changed = True
    while changed:
        changed = False
        for v in sorted(trap):
            for t in spec.rules[v]:
                if len(t) != spec.capacity[v] or not set(t) <= trap:
                    trap.discard(v)
                    changed = True
                    break
    return frozenset(trap)


def validate(spec: SandpileSpec) -> ValidationReport:
    errors: list[Violation] = []
    sites = set(spec.sites)
    if not spec.sites:
        errors.append(Violation("no sites", None, "a sandpile needs at least one site"))
    for v in spec.sites:
        if v not in spec.capacity:
            errors.append(Violation("missing capacity", v, "no capacity given"))
        elif not isinstance(spec.capacity[v], int) or spec.capacity[v] < 1:
            errors.append(Violation("nonpositive capacity", v, f"C={spec.capacity[v]!r}"))
        if v not in spec.rules:
            errors.append(Violation("missing rules", v, "no rule list given"))
        elif not spec.rules[v]:
            errors.append(Violation("empty rule list", v, "at least one rule is required"))
    for v in sorted(set(spec.capacity) - sites):
        errors.append(Violation("unknown site in capacity", v, "not a declared site"))
    for v in sorted(set(spec.rules) - sites):
        errors.append(Violation("unknown site in rules", v, "not a declared site"))
    for v in spec.sites:
        cap = spec.capacity.get(v)
        for i, t in enumerate(spec.rules.get(v, ())):
            unknown = sorted(set(t) - sites)
            if unknown:
                errors.append(
                    Violation("unknown site in rule", v, f"rule {i} names {', '.join(unknown)}")
                )
            if v in t:
                errors.append(Violation("self-delivery", v, f"rule {i} delivers to its own site"))
            if isinstance(cap, int) and len(t) > cap:
                errors.append(
                    Violation("rule exceeds capacity", v, f"rule {i} has {len(t)} > C={cap}")
                )
    warnings: list[Violation] = []
    if not errors:
        trap = closed_traps(spec)
        if trap:
            warnings.append(
                Violation(
                    "potential non-terminating stabilization branch",
                    None,
                    "no rule choice lets particles leave {" + ", ".join(sorted(trap)) + "}",
                )
            )
    return ValidationReport(tuple(errors), tuple(warnings))


# --------------------------------------------------------------------------
# toppling


def unstable_sites(spec: SandpileSpec, config: Configuration) -> tuple[str, ...]:
    return tuple(v for v in spec.sites if config.heights[v] >= spec.capacity[v])


def is_stable(spec: SandpileSpec, config: Configuration) -> bool:
    return not unstable_sites(spec, config)


def topple(
    spec: SandpileSpec, config: Configuration, site: str, rule_index: int
) -> tuple[Configuration, ToppleEvent]:
    spec.require_sites([site])
    cap = spec.capacity[site]
    if config.heights[site] < cap:
        raise ToppleAtStableSite(f"{site} holds {config.heights[site]} < C={cap}")
    rules = spec.rules[site]
    if not 0 <= rule_index < len(rules):
        raise InvalidRuleIndex(f"{site} has {len(rules)} rules, got index {rule_index}")
    heights = dict(config.heights)
    heights[site] -= cap
    for u, k in Counter(rules[rule_index]).items():
        heights[u] += k
    event = ToppleEvent(site, rule_index, cap - len(rules[rule_index]))
    return Configuration(heights), event


Policy = Callable[[Configuration, Sequence[str]], tuple[str, int]]


def first_site_policy(rule_index: int = 0) -> Policy:
    """Topple the first unstable site, always with the same rule index."""

    def policy(config, unstable):
        return unstable[0], rule_index

    return policy


def default_step_budget(spec: SandpileSpec) -> int:
    return 10_000 * len(spec.sites)


def stabilize(
    spec: SandpileSpec,
    config: Configuration,
    policy: Policy | None = None,
    max_steps: int | None = None,
    trail_length: int = 8,
) -> Configuration:
    """Topple according to ``policy`` until no site is unstable.

    Raises :class:`StepBudgetExhausted` carrying the last ``trail_length``
    configurations if ``max_steps`` topplings do not suffice.
    """
    check_paired(spec, config)
    policy = policy or first_site_policy()
    budget = default_step_budget(spec) if max_steps is None else max_steps
    trail: list[Configuration] = []
    steps = 0
    while True:
        unstable = unstable_sites(spec, config)
        if not unstable:
            return config
        if steps >= budget:
            raise StepBudgetExhausted(
                f"no stable configuration after {steps} topplings", trail[-trail_length:]
            )
        site, rule_index = policy(config, unstable)
        config, _ = topple(spec, config, site, rule_index)
        trail.append(config)
        if len(trail) > trail_length:
            del trail[0]
        steps += 1
