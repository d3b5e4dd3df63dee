"""Exact game values on small boards.

Both games are solved by depth-first minimax with a transposition table keyed
on the canonical form of the position.  The player to move is a function of
the edge count, so the key needs no extra mover field.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Optional

from .canon import CANONICAL_EXACT_LIMIT, canonical_form, canonical_graph
from .game import GameState, Role
from .graph import Edge, Graph, GraphError

SATURATION_LIMIT = CANONICAL_EXACT_LIMIT
HAJNAL_DEFAULT_LIMIT = 8
NAIVE_LIMIT = 5


class SolverLimitError(ValueError):
    """Requested board is beyond what the solver accepts."""


@dataclass
class SolveResult:
    n: int
    game: str
    first_mover: Role
    value: Optional[int] = None
    winner: Optional[str] = None
    principal_variation: list[Edge] = field(default_factory=list)
    nodes_expanded: int = 0
    table_hits: int = 0

    def to_json(self) -> dict:
        out = {"n": self.n, "game": self.game, "nodes": self.nodes_expanded, "table_hits": self.table_hits,
               "pv": [list(e) for e in self.principal_variation]}
        if self.game == "saturation":
            out["convention"] = "sat_g" if self.first_mover is Role.MINIMIZER else "sat_g'"
            out["value"] = self.value
        else:
            out["winner"] = self.winner
        return out


class _SaturationTable:
    def __init__(self, first_mover: Role):
        self.first_mover = first_mover
        self.table: dict[bytes, int] = {}
        self.nodes = 0
        self.hits = 0

    def mover(self, g: Graph) -> Role:
        return self.first_mover if g.m % 2 == 0 else self.first_mover.other

    def value(self, g: Graph) -> int:
        key, rep = canonical_graph(g)
        got = self.table.get(key.data)
        if got is not None:
            self.hits += 1
            return got
        self.nodes += 1
        moves = rep.legal_moves()
        if not moves:
            val = rep.m
        else:
            vals = (self.value(rep.add_edge(e, checked=False)) for e in moves)
            val = min(vals) if self.mover(rep) is Role.MINIMIZER else max(vals)
        self.table[key.data] = val
        return val

    def best_move(self, g: Graph) -> Optional[Edge]:
        moves = g.legal_moves()
        if not moves:
            return None
        scored = [(self.value(g.add_edge(e, checked=False)), e) for e in moves]
        if self.mover(g) is Role.MINIMIZER:
            return min(scored, key=lambda t: (t[0], t[1]))[1]
        return min(scored, key=lambda t: (-t[0], t[1]))[1]


class _HajnalTable:
    def __init__(self) -> None:
        self.table: dict[bytes, bool] = {}
        self.nodes = 0
        self.hits = 0

    def mover_wins(self, g: Graph) -> bool:
        key, rep = canonical_graph(g)
        got = self.table.get(key.data)
        if got is not None:
            self.hits += 1
            return got
        self.nodes += 1
        win = any(not self.mover_wins(rep.add_edge(e, checked=False)) for e in rep.legal_moves())
        self.table[key.data] = win
        return win

    def best_move(self, g: Graph) -> Optional[Edge]:
        moves = g.legal_moves()
        for e in moves:
            if not self.mover_wins(g.add_edge(e, checked=False)):
                return e
        return moves[0] if moves else None


def _pv(g: Graph, chooser) -> list[Edge]:
    pv = []
    while True:
        e = chooser(g)
        if e is None:
            return pv
        pv.append(e)
        g = g.add_edge(e)


def _ensure_recursion(n: int) -> None:
    need = n * n // 4 * 3 + 200
    if sys.getrecursionlimit() < need:
        sys.setrecursionlimit(need)


def solve_saturation_score(n: int, first_mover: Role = Role.MINIMIZER) -> SolveResult:
    if n < 2:
        raise GraphError("the game needs at least two vertices")
    if n > SATURATION_LIMIT:
        raise SolverLimitError(f"exact solving is limited to n <= {SATURATION_LIMIT} (canonical form limit)")
    _ensure_recursion(n)
    t = _SaturationTable(first_mover)
    value = t.value(Graph(n))
    pv = _pv(Graph(n), t.best_move)
    return SolveResult(n, "saturation", first_mover, value=value, principal_variation=pv,
                       nodes_expanded=t.nodes, table_hits=t.hits)


def solve_hajnal_winner(n: int, long_running: bool = False) -> SolveResult:
    if n < 3:
        raise GraphError("Hajnal's game needs at least three vertices")
    limit = SATURATION_LIMIT if long_running else HAJNAL_DEFAULT_LIMIT
    if n > limit:
        raise SolverLimitError(f"Hajnal solving is limited to n <= {limit}"
                               + ("" if long_running else " without the long-running flag"))
    _ensure_recursion(n)
    t = _HajnalTable()
    first_wins = t.mover_wins(Graph(n))
    pv = _pv(Graph(n), t.best_move)
    return SolveResult(n, "hajnal", Role.MINIMIZER, winner="first" if first_wins else "second",
                       principal_variation=pv, nodes_expanded=t.nodes, table_hits=t.hits)


def naive_reference_solver(n: int, first_mover: Role = Role.MINIMIZER) -> SolveResult:
    """Full game tree, no table and no canonical forms."""
    if n < 2:
        raise GraphError("the game needs at least two vertices")
    if n > NAIVE_LIMIT:
        raise SolverLimitError(f"the naive solver is limited to n <= {NAIVE_LIMIT}")
    nodes = 0

    def value(g: Graph) -> int:
        nonlocal nodes
        nodes += 1
        moves = g.legal_moves()
        if not moves:
            return g.m
        mover = first_mover if g.m % 2 == 0 else first_mover.other
        vals = [value(g.add_edge(e, checked=False)) for e in moves]
        return min(vals) if mover is Role.MINIMIZER else max(vals)

    v = value(Graph(n))
    return SolveResult(n, "saturation", first_mover, value=v, nodes_expanded=nodes)


_TABLES: dict[tuple[int, Role], _SaturationTable] = {}


def best_saturation_move(state: GameState) -> Optional[Edge]:
    """Optimal move for the player to move in the saturation game."""
    n = state.graph.n
    if n > SATURATION_LIMIT:
        raise SolverLimitError(f"exact play is limited to n <= {SATURATION_LIMIT}")
    _ensure_recursion(n)
    key = (n, state.config.first_mover)
    t = _TABLES.get(key)
    if t is None:
        t = _TABLES[key] = _SaturationTable(state.config.first_mover)
    return t.best_move(state.graph)


def position_key(g: Graph) -> bytes:
    return canonical_form(g).data
