"""The builder's potential function ("count") over the unused vertex set U.

count(U) = number of components holding a U-vertex + the best progress bonus:

    5  P3 inside U plus another U-vertex in its component at distance >= 3
       from an endpoint
    4  P3 inside U
    3  P2 inside U plus a U-vertex at distance >= 3 from an endpoint
    2  P2 inside U
    1  two U-vertices at distance >= 3 in one component
    0  otherwise

Distances are measured in the whole graph.  ``strict=True`` demands distance
at least 3 from *both* endpoints of the P3/P2 instead of from one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .graph import Graph, iter_bits, lowest_bit, to_mask


@dataclass(frozen=True)
class CountBreakdown:
    base: int
    bonus: int
    witness: Optional[tuple[int, ...]] = None
    far_vertex: Optional[int] = None
    strict: bool = field(default=False, compare=False)

    @property
    def total(self) -> int:
        return self.base + self.bonus

    def to_json(self) -> dict:
        return {"base": self.base, "bonus": self.bonus, "count": self.total,
                "witness": list(self.witness) if self.witness else None, "far": self.far_vertex}


def _component_lookup(g: Graph, u: int) -> tuple[int, dict[int, int]]:
    """Number of components meeting ``u`` and, per U-vertex, the U-part of its component."""
    base = 0
    comp_u: dict[int, int] = {}
    for comp in g.component_masks():
        inside = comp & u
        if inside:
            base += 1
            for v in iter_bits(inside):
                comp_u[v] = inside
    return base, comp_u


def compute_count(g: Graph, u: Iterable[int] | int, strict: bool = False) -> CountBreakdown:
    umask = to_mask(u)
    rows = g.rows
    base, comp_u = _component_lookup(g, umask)

    far: dict[int, int] = {}

    def far_of(v: int) -> int:
        f = far.get(v)
        if f is None:
            f = far[v] = comp_u[v] & ~g.ball2(v)
        return f

    has_p2 = None
    level3 = None
    best_p3 = None
    for b in iter_bits(umask):
        nb = rows[b] & umask
        if not nb:
            continue
        if nb & (nb - 1):
            ends = list(iter_bits(nb))
            if best_p3 is None:
                best_p3 = (ends[0], b, ends[1])
            for i, a in enumerate(ends):
                for c in ends[i + 1:]:
                    if strict:
                        hit = far_of(a) & far_of(c)
                    else:
                        hit = far_of(a) | far_of(c)
                    if hit:
                        return CountBreakdown(base, 5, (a, b, c), lowest_bit(hit), strict)
        if level3 is None:
            for a in iter_bits(nb):
                hit = (far_of(a) & far_of(b)) if strict else (far_of(a) | far_of(b))
                if hit:
                    level3 = CountBreakdown(base, 3, (min(a, b), max(a, b)), lowest_bit(hit), strict)
                    break
        if has_p2 is None:
            a = lowest_bit(nb)
            has_p2 = (min(a, b), max(a, b))
    if best_p3 is not None:
        return CountBreakdown(base, 4, best_p3, None, strict)
    if level3 is not None:
        return level3
    if has_p2 is not None:
        return CountBreakdown(base, 2, has_p2, None, strict)
    for v in iter_bits(umask):
        hit = far_of(v)
        if hit:
            return CountBreakdown(base, 1, (v,), lowest_bit(hit), strict)
    return CountBreakdown(base, 0, None, None, strict)


def count_delta(before: CountBreakdown, after: CountBreakdown) -> int:
    return before.total - after.total
