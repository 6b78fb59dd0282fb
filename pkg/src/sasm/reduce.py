"""REDUCE: fixed-point pruning of sites that can flush all their particles.

A site is flushable once it owns a rule whose every target has already been
flushed (in the first round: a rule delivering everything to the sink).
Repeating until nothing changes leaves the residual site set.  A nonempty
residual is irreducible, and the all-zero assignment on it is forbidden.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .errors import NotMinimalIrreducible
from .model import SandpileSpec, SubConfiguration


@dataclass(frozen=True)
class ReduceTrace:
    layers: tuple[frozenset[str], ...]
    flushed: frozenset[str]
    residual: frozenset[str]
    reduced_spec: SandpileSpec

    def to_json(self, include_layers: bool = True) -> dict:
        doc = {"flushed": sorted(self.flushed), "residual": sorted(self.residual)}
        if include_layers:
            doc["layers"] = [sorted(layer) for layer in self.layers]
        return doc


def restrict(spec: SandpileSpec, keep: Iterable[str], name: str | None = None) -> SandpileSpec:
    """Sub-sandpile on ``keep``: each rule is intersected (as a multiset) with it."""
    keep = frozenset(keep)
    spec.require_sites(keep)
    rules = {v: [[u for u in t if u in keep] for t in spec.rules[v]] for v in keep}
    return SandpileSpec(
        spec.name if name is None else name,
        tuple(keep),
        {v: spec.capacity[v] for v in keep},
        rules,
    )


def reduce(spec: SandpileSpec) -> ReduceTrace:
    """Run REDUCE with simultaneous rounds; one layer per round.

    Each rule keeps a count of its distinct targets still present, so the
    whole run touches every rule entry a constant number of times.
    """
    remaining: dict[tuple[str, int], int] = {}
    watchers: dict[str, list[tuple[str, int]]] = {v: [] for v in spec.sites}
    ready: set[str] = set()
    for v in spec.sites:
        for i, t in enumerate(spec.rules[v]):
            support = set(t)
            remaining[v, i] = len(support)
            for u in support:
                watchers[u].append((v, i))
            if not support:
                ready.add(v)

    alive = set(spec.sites)
    layers: list[frozenset[str]] = []
    while ready:
        layer = frozenset(ready)
        layers.append(layer)
        alive -= layer
        ready = set()
        for u in layer:
            for v, i in watchers[u]:
                remaining[v, i] -= 1
                if remaining[v, i] == 0 and v in alive:
                    ready.add(v)

    residual = frozenset(alive)
    flushed = frozenset(spec.sites) - residual
    return ReduceTrace(tuple(layers), flushed, residual, restrict(spec, residual))


def flushed_set(spec: SandpileSpec) -> frozenset[str]:
    return reduce(spec).flushed


def is_irreducible(spec: SandpileSpec) -> bool:
    return not reduce(spec).flushed


def is_minimal_irreducible(spec: SandpileSpec) -> bool:
    if not spec.sites or not is_irreducible(spec):
        return False
    everything = set(spec.sites)
    return all(not reduce(restrict(spec, everything - {v})).residual for v in spec.sites)


def decide_fsc_exists(spec: SandpileSpec) -> SubConfiguration | None:
    """All-zero witness on the residual, or None when every configuration is recurrent."""
    residual = reduce(spec).residual
    if not residual:
        return None
    return SubConfiguration.zeros(residual)


def layered_decomposition(spec: SandpileSpec, site: str) -> tuple[frozenset[str], ...]:
    spec.require_sites([site])
    trace = reduce(restrict(spec, set(spec.sites) - {site}))
    if trace.residual:
        raise NotMinimalIrreducible(
            f"deleting {site} leaves residual {{{', '.join(sorted(trace.residual))}}}"
        )
    return trace.layers


def enumerate_fsc_supports(spec: SandpileSpec, budget: int = 10) -> list[SubConfiguration]:
    """Zero witnesses from REDUCE on the spec and on single-site deletions of it.

    Deletion sets are explored breadth-first; each REDUCE run costs one unit
    of ``budget``.  Only sites of the current residual are deleted next.
    """
    witnesses: set[frozenset[str]] = set()
    seen: set[frozenset[str]] = {frozenset()}
    queue: deque[frozenset[str]] = deque([frozenset()])
    everything = frozenset(spec.sites)
    runs = 0
    while queue and runs < budget:
        deleted = queue.popleft()
        residual = reduce(restrict(spec, everything - deleted)).residual
        runs += 1
        if not residual:
            continue
        witnesses.add(residual)
        for v in sorted(residual):
            nxt = deleted | {v}
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    ordered = sorted(witnesses, key=lambda r: (len(r), sorted(r)))
    return [SubConfiguration.zeros(r) for r in ordered]

