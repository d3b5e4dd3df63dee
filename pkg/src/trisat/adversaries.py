"""Opponents for the builder, from passive to exactly optimal."""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .builder import BuilderMemory, c5_completions
from .game import GameState, LegalMoveIndex
from .graph import Edge, Graph, iter_bits, lowest_bit, to_mask

MINIMAX_LIMIT = 8


class AdversaryKind(str, Enum):
    RANDOM = "random"
    C4_CLOSER = "c4closer"
    INTERFERER = "interferer"
    STAR_BUILDER = "starbuilder"
    MINIMAX = "minimax"
    PASSIVE = "passive"


SUITE = (AdversaryKind.RANDOM, AdversaryKind.C4_CLOSER, AdversaryKind.INTERFERER,
         AdversaryKind.STAR_BUILDER, AdversaryKind.PASSIVE)


@dataclass(frozen=True)
class AdversarySpec:
    kind: AdversaryKind
    seed: int = 0
    center: int = 0

    def validate(self, n: int) -> None:
        if self.kind is AdversaryKind.MINIMAX and n > MINIMAX_LIMIT:
            raise ValueError(f"minimax adversary is limited to n <= {MINIMAX_LIMIT}")

    @property
    def name(self) -> str:
        return self.kind.value


def _lowest(g: Graph, index: Optional[LegalMoveIndex]) -> Optional[Edge]:
    if index is not None:
        return index.lowest(g)
    for a in range(g.n):
        row = g.legal_partners(a) >> (a + 1)
        if row:
            return Edge(a, a + 1 + lowest_bit(row))
    return None


class Adversary:
    """A per-game opponent; holds its own seeded generator and caches."""

    def __init__(self, spec: AdversarySpec, n: int, first_mover=None):
        spec.validate(n)
        self.spec = spec
        self.n = n
        self.rng = random.Random(spec.seed)
        self._star_done = False
        self._first_mover = first_mover

    def move(self, state: GameState, mem: Optional[BuilderMemory] = None,
             index: Optional[LegalMoveIndex] = None) -> Edge:
        g = state.graph
        kind = self.spec.kind
        e: Optional[Edge] = None
        if kind is AdversaryKind.PASSIVE:
            e = self._passive(g, mem, index)
        elif kind is AdversaryKind.STAR_BUILDER:
            e = self._star(g)
        elif kind is AdversaryKind.C4_CLOSER:
            e = self._close_c4(g, mem)
        elif kind is AdversaryKind.INTERFERER:
            e = self._interfere(g, mem)
        elif kind is AdversaryKind.MINIMAX:
            e = self._minimax(state)
        if e is None:
            e = self._random(g, index)
        if e is None:
            raise ValueError("adversary asked to move on a terminal position")
        return e

    # policies -------------------------------------------------------------

    def _random(self, g: Graph, index: Optional[LegalMoveIndex]) -> Optional[Edge]:
        if index is not None:
            return index.sample(g, self.rng)
        moves = g.legal_moves()
        return self.rng.choice(moves) if moves else None

    def _passive(self, g: Graph, mem: Optional[BuilderMemory],
                 index: Optional[LegalMoveIndex] = None) -> Optional[Edge]:
        w = mem.construction_mask if mem is not None else 0
        first = _lowest(g, index)
        if first is None or not w:
            return first
        fallback = None
        # every pair below the lowest legal one is illegal
        for a in range(first.u, g.n):
            row = g.legal_partners(a) & ~((1 << (a + 1)) - 1)
            if not row:
                continue
            if fallback is None:
                fallback = Edge(a, lowest_bit(row))
            if w >> a & 1:
                continue
            clean = row & ~w
            if clean:
                return Edge(a, lowest_bit(clean))
        return fallback

    def _star(self, g: Graph) -> Optional[Edge]:
        if self._star_done:
            return None
        c = self.spec.center % g.n
        partners = g.legal_partners(c)
        if partners:
            return Edge.of(c, lowest_bit(partners))
        self._star_done = True
        return None

    def _close_c4(self, g: Graph, mem: Optional[BuilderMemory]) -> Optional[Edge]:
        if mem is None:
            return None
        rows = g.rows
        for path in (mem.first, mem.second):
            if len(path) == 4:
                a, d = path[0], path[3]
                if not rows[a] >> d & 1 and not rows[a] & rows[d]:
                    return Edge.of(a, d)
        # any induced P4 inside the construction
        vs = mem.construction
        vmask = to_mask(vs)
        for a in vs:
            for b in iter_bits(rows[a] & vmask):
                for c in iter_bits(rows[b] & vmask & ~(1 << a)):
                    for d in iter_bits(rows[c] & vmask & ~(1 << b) & ~(1 << a)):
                        if not rows[a] >> d & 1 and not rows[a] & rows[d]:
                            return Edge.of(a, d)
        return None

    def _interfere(self, g: Graph, mem: Optional[BuilderMemory]) -> Optional[Edge]:
        if mem is None or not mem.construction:
            return None
        vs = mem.construction
        vmask = to_mask(vs)
        rows = g.rows
        comps = c5_completions(g, vs)
        # legal pairs inside the construction stand in for future completions
        pairs = [(a, b) for a in vs for b in vs if a < b and not rows[a] >> b & 1 and not rows[a] & rows[b]]
        best = None
        best_key = None
        for a in vs:
            for b in iter_bits(g.legal_partners(a)):
                e = Edge.of(a, b)
                ra = rows[a] | 1 << b
                rb = rows[b] | 1 << a

                def row(x: int) -> int:
                    return ra if x == a else rb if x == b else rows[x]

                killed = sum(1 for (x, y) in comps if (x, y) != e and row(x) & row(y))
                killed_pairs = sum(1 for (x, y) in pairs if (x, y) != e and row(x) & row(y))
                fresh_touch = int(not mem.touched >> a & 1) + int(vmask >> b & 1 and not mem.touched >> b & 1)
                key = (killed, killed_pairs, fresh_touch, -e.u, -e.v)
                if best_key is None or key > best_key:
                    best, best_key = e, key
        return best

    def _minimax(self, state: GameState) -> Optional[Edge]:
        from .solver import best_saturation_move

        return best_saturation_move(state)


def adversary_move(spec: AdversarySpec, state: GameState, mem: Optional[BuilderMemory] = None) -> Edge:
    """Stateless convenience wrapper (a fresh generator per call)."""
    return Adversary(spec, state.graph.n).move(state, mem)
