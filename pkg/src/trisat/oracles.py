"""Exhaustive checks of the small extremal facts about 5-cycles, plus bound formulas.

Two disjoint 5-cycles sit on vertices 0..4 and 5..9.  A cross configuration
is a 25-bit mask; bit ``5*i + j`` is the edge between ``i`` and ``5 + j``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .canon import canonical_form
from .graph import Graph, GraphError

CROSS_BITS = 25


def _bit(i: int, j: int) -> int:
    return 5 * i + j


def forbidden_pairs() -> list[tuple[int, int]]:
    """Pairs of cross edges that together close a triangle with a cycle edge."""
    out = []
    for i in range(5):
        for j in range(5):
            out.append((_bit(i, j), _bit((i + 1) % 5, j)))
            out.append((_bit(i, j), _bit(i, (j + 1) % 5)))
    return out


def _blockers(i: int, j: int) -> list[int]:
    """Cross edges whose presence makes (i, j) illegal."""
    return [_bit((i + 1) % 5, j), _bit((i - 1) % 5, j), _bit(i, (j + 1) % 5), _bit(i, (j - 1) % 5)]


def cross_graph(mask: int) -> Graph:
    edges = [(i, (i + 1) % 5) for i in range(5)] + [(5 + i, 5 + (i + 1) % 5) for i in range(5)]
    edges += [(i, 5 + j) for i in range(5) for j in range(5) if mask >> _bit(i, j) & 1]
    return Graph.from_edges(10, edges)


def is_legal_cross(mask: int) -> bool:
    return all(not (mask >> a & 1 and mask >> b & 1) for a, b in forbidden_pairs())


def is_cross_maximal(mask: int) -> bool:
    for i in range(5):
        for j in range(5):
            if not mask >> _bit(i, j) & 1 and not any(mask >> b & 1 for b in _blockers(i, j)):
                return False
    return True


@dataclass
class OracleReport:
    claim: str
    search_space: int
    value: int
    labeled_count: Optional[int] = None
    iso_classes: Optional[int] = None
    witnesses: list[int] = field(default_factory=list)
    mode: str = "exhaustive"
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"claim": self.claim, "mode": self.mode, "search_space": self.search_space, "value": self.value}
        if self.claim == "cross-c5-max":
            out.update({"max": self.value, "labeled": self.labeled_count, "iso_classes": self.iso_classes})
        elif self.claim == "cross-c5-min-maximal":
            out.update({"min": self.value, "labeled": self.labeled_count, "iso_classes": self.iso_classes})
        else:
            out["max"] = self.value
        if self.witnesses:
            out["witness_edges"] = [cross_graph(w).to_text() for w in self.witnesses[:1]]
        out.update(self.extra)
        return out


def _iso_classes(masks: list[int]) -> int:
    return len({canonical_form(cross_graph(m)).data for m in masks})


def _pruned_legal_masks() -> tuple[list[int], int]:
    """Legal cross masks, built vertex by vertex from independent neighbourhoods."""
    options = [0] + [1 << j for j in range(5)] + [(1 << j) | (1 << ((j + 2) % 5)) for j in range(5)]
    legal = []
    examined = 0
    for rows in itertools.product(options, repeat=5):
        examined += 1
        ok = True
        for i in range(5):
            if rows[i] & rows[(i + 1) % 5]:
                ok = False
                break
        if ok:
            mask = 0
            for i, r in enumerate(rows):
                mask |= r << (5 * i)
            legal.append(mask)
    return legal, examined


def _full_scan(chunk_bits: int = 22):
    """Yield (masks, legal, maximal) boolean arrays over all 2^25 subsets."""
    pairs = forbidden_pairs()
    chunk = 1 << chunk_bits
    for start in range(0, 1 << CROSS_BITS, chunk):
        masks = np.arange(start, start + chunk, dtype=np.uint32)
        bits = [((masks >> np.uint32(b)) & np.uint32(1)).astype(bool) for b in range(CROSS_BITS)]
        legal = np.ones(chunk, dtype=bool)
        for a, b in pairs:
            legal &= ~(bits[a] & bits[b])
        maximal = np.ones(chunk, dtype=bool)
        for i in range(5):
            for j in range(5):
                blocked = np.zeros(chunk, dtype=bool)
                for b in _blockers(i, j):
                    blocked |= bits[b]
                maximal &= bits[_bit(i, j)] | blocked
        yield masks, legal, maximal


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a) if hasattr(np, "bitwise_count") else np.array([int(x).bit_count() for x in a])


def cross_c5_max_edges(full: bool = False) -> OracleReport:
    """Most triangle-free cross edges between two disjoint 5-cycles."""
    if full:
        best = -1
        winners: list[int] = []
        for masks, legal, _ in _full_scan():
            cand = masks[legal]
            if not len(cand):
                continue
            pc = _popcount(cand)
            top = int(pc.max())
            if top > best:
                best, winners = top, []
            if top == best:
                winners.extend(int(x) for x in cand[pc == top])
        return OracleReport("cross-c5-max", 1 << CROSS_BITS, best, len(winners), _iso_classes(winners),
                            winners, mode="full")
    legal, examined = _pruned_legal_masks()
    best = max(m.bit_count() for m in legal)
    winners = sorted(m for m in legal if m.bit_count() == best)
    return OracleReport("cross-c5-max", examined, best, len(winners), _iso_classes(winners), winners,
                        mode="pruned", extra={"legal_configurations": len(legal)})


def cross_c5_min_maximal(full: bool = False) -> OracleReport:
    """Fewest cross edges in a triangle-free configuration admitting no further cross edge."""
    if full:
        best = CROSS_BITS + 1
        winners = []
        for masks, legal, maximal in _full_scan():
            cand = masks[legal & maximal]
            if not len(cand):
                continue
            pc = _popcount(cand)
            low = int(pc.min())
            if low < best:
                best, winners = low, []
            if low == best:
                winners.extend(int(x) for x in cand[pc == low])
        return OracleReport("cross-c5-min-maximal", 1 << CROSS_BITS, best, len(winners), _iso_classes(winners),
                            winners, mode="full")
    legal, examined = _pruned_legal_masks()
    maximal = [m for m in legal if is_cross_maximal(m)]
    best = min(m.bit_count() for m in maximal)
    winners = sorted(m for m in maximal if m.bit_count() == best)
    return OracleReport("cross-c5-min-maximal", examined, best, len(winners), _iso_classes(winners), winners,
                        mode="pruned")


def vertex_c5_max_edges() -> OracleReport:
    """Most edges from one outside vertex to a 5-cycle without a triangle."""
    by_size: dict[int, int] = {}
    legal_by_size: dict[int, int] = {}
    for s in range(1 << 5):
        k = s.bit_count()
        by_size[k] = by_size.get(k, 0) + 1
        ok = all(not (s >> i & 1 and s >> ((i + 1) % 5) & 1) for i in range(5))
        if ok:
            legal_by_size[k] = legal_by_size.get(k, 0) + 1
    best = max(legal_by_size)
    return OracleReport("vertex-c5-max", 1 << 5, best, legal_by_size[best], mode="exhaustive",
                        extra={"legal_by_size": {str(k): v for k, v in sorted(legal_by_size.items())},
                               "subsets_by_size": {str(k): v for k, v in sorted(by_size.items())}})


def density_bound(k: int) -> Fraction:
    """Edge density coefficient for a board covered by k-cycle building: (k^2 - 2k + 5) / (4k^2)."""
    if k < 5:
        raise GraphError("density bound needs k >= 5")
    return Fraction(k * k - 2 * k + 5, 4 * k * k)


def trivial_bounds(n: int) -> tuple[int, int]:
    if n < 2:
        raise GraphError("trivial bounds need n >= 2")
    return n - 1, n * n // 4


def frs_lower_bound(n: int) -> float:
    """(n ln n)/2 - 2 n ln ln n, natural logarithm, display only."""
    if n < 16:
        raise GraphError("the lower-bound formula is only evaluated for n >= 16")
    return n * math.log(n) / 2 - 2 * n * math.log(math.log(n))


CLAIMS = {
    "cross-c5-max": cross_c5_max_edges,
    "vertex-c5-max": vertex_c5_max_edges,
    "cross-c5-min-maximal": cross_c5_min_maximal,
}
