"""Gluing forbidden sub-configurations into larger ones.

Two forbidden assignments on irreducible regions that agree where the regions
overlap combine into a forbidden assignment on the union, provided one extra
particle is placed on a shared site that no rule connects to the rest of the
overlap.  Chaining 2x2 zero blocks corner to corner along the diagonal of
Manna's model gives arbitrarily large examples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .builders import grid_ns_ew, parse_site_name, site_name
from .errors import (
    GlueSiteNotIsolated,
    GlueSiteNotShared,
    InvalidCount,
    NotIrreducibleInput,
    RegionsDisagreeOnIntersection,
)
from .model import SandpileSpec, SubConfiguration
from .reduce import is_irreducible, restrict


@dataclass(frozen=True)
class GlueSpec:
    region_a: frozenset[str]
    region_b: frozenset[str]
    glue_site: str

    def check(self, spec: SandpileSpec) -> None:
        """Raise unless the gluing preconditions hold on ``spec``."""
        for label, region in (("region_a", self.region_a), ("region_b", self.region_b)):
            if not is_irreducible(restrict(spec, region)):
                raise NotIrreducibleInput(f"{label} does not restrict to an irreducible sandpile")
        check_glue_site(spec, self.region_a, self.region_b, self.glue_site)


def check_glue_site(spec: SandpileSpec, region_a, region_b, glue_site: str) -> None:
    shared = set(region_a) & set(region_b)
    if glue_site not in shared:
        raise GlueSiteNotShared(f"{glue_site} is not in both regions")
    union = restrict(spec, set(region_a) | set(region_b))
    others = shared - {glue_site}
    for i, t in enumerate(union.rules[glue_site]):
        hit = sorted(others.intersection(t))
        if hit:
            raise GlueSiteNotIsolated(
                f"rule {i} of {glue_site} delivers to shared site {', '.join(hit)}"
            )


def union_subsandpiles(
    spec: SandpileSpec, region_a: Iterable[str], region_b: Iterable[str]
) -> SandpileSpec:
    region_a, region_b = frozenset(region_a), frozenset(region_b)
    for label, region in (("region_a", region_a), ("region_b", region_b)):
        if not is_irreducible(restrict(spec, region)):
            raise NotIrreducibleInput(f"{label} does not restrict to an irreducible sandpile")
    union = restrict(spec, region_a | region_b)
    assert is_irreducible(union), "union of irreducible sub-sandpiles must be irreducible"
    return union


def glue(
    c1: SubConfiguration,
    c2: SubConfiguration,
    glue_site: str,
    spec: SandpileSpec | None = None,
) -> SubConfiguration:
    """``c1`` joined with ``c2`` plus one particle at ``glue_site``.

    Forbiddenness of the inputs is the caller's responsibility.  When ``spec``
    is given, the glue site is also checked to have no rule delivering to
    another shared site.
    """
    shared = c1.region & c2.region
    clash = sorted(v for v in shared if c1[v] != c2[v])
    if clash:
        raise RegionsDisagreeOnIntersection(f"heights differ at {', '.join(clash)}")
    if glue_site not in shared:
        raise GlueSiteNotShared(f"{glue_site} is not in both regions")
    if spec is not None:
        check_glue_site(spec, c1.region, c2.region, glue_site)
    heights = dict(c1.heights)
    heights.update(c2.heights)
    heights[glue_site] += 1
    return SubConfiguration(heights)


def block(row: int, col: int) -> frozenset[str]:
    """The 2x2 block whose north-west site is ``r{row}c{col}``."""
    return frozenset(site_name(row + i, col + j) for i in (0, 1) for j in (0, 1))


def manna_fsc_chain(k: int, offset: tuple[int, int] = (0, 0)) -> SubConfiguration:
    """Diagonal chain of ``k`` zero 2x2 blocks glued at shared corners.

    Block ``i`` covers rows and columns ``i`` and ``i + 1`` (shifted by
    ``offset``); the result has ``3k + 1`` sites and a single particle on
    each of the ``k - 1`` shared corners.
    """
    if k < 1:
        raise InvalidCount(f"block count must be >= 1, got {k}")
    dr, dc = offset
    if dr < 0 or dc < 0:
        raise InvalidCount(f"offset must be nonnegative, got {offset}")
    spec = grid_ns_ew(k + 1 + dr, k + 1 + dc)
    chain = SubConfiguration.zeros(block(1 + dr, 1 + dc))
    for i in range(2, k + 1):
        nxt = SubConfiguration.zeros(block(i + dr, i + dc))
        chain = glue(chain, nxt, site_name(i + dr, i + dc), spec)
    return chain


def render(sub: SubConfiguration, rows: int | None = None, cols: int | None = None) -> str:
    """Grid picture of a sub-configuration on ``r{i}c{j}`` sites; ``.`` marks
    sites outside the region."""
    coords = {parse_site_name(v): h for v, h in sub.heights.items()}
    rows = rows or max(r for r, _ in coords)
    cols = cols or max(c for _, c in coords)
    lines = []
    for r in range(1, rows + 1):
        lines.append(" ".join(str(coords[r, c]) if (r, c) in coords else "." for c in range(1, cols + 1)))
    return "\n".join(lines)
