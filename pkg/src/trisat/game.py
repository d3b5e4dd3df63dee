"""The alternating triangle-free saturation game and its JSON-lines trace format."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Iterator, Optional, Sequence

from .graph import Edge, Graph, GraphError, IllegalMoveError


class GameStateError(RuntimeError):
    """Move attempted on a finished game, or score requested too early."""


class Role(str, Enum):
    MINIMIZER = "minimizer"
    MAXIMIZER = "maximizer"

    @property
    def other(self) -> "Role":
        return Role.MAXIMIZER if self is Role.MINIMIZER else Role.MINIMIZER


@dataclass(frozen=True)
class GameConfig:
    n: int
    first_mover: Role = Role.MINIMIZER

    def __post_init__(self) -> None:
        if self.n < 2:
            raise GraphError("the game needs at least two vertices")


class _Move:
    __slots__ = ("role", "edge", "prev")

    def __init__(self, role: Role, edge: Edge, prev: Optional["_Move"]):
        self.role = role
        self.edge = edge
        self.prev = prev


class GameState:
    """Immutable game position; ``apply`` returns a successor."""

    __slots__ = ("graph", "config", "_last")

    def __init__(self, graph: Graph, config: GameConfig, last: Optional[_Move] = None):
        self.graph = graph
        self.config = config
        self._last = last

    @property
    def to_move(self) -> Role:
        first = self.config.first_mover
        return first if self.graph.m % 2 == 0 else first.other

    @property
    def history(self) -> tuple[tuple[Role, Edge], ...]:
        out = []
        node = self._last
        while node is not None:
            out.append((node.role, node.edge))
            node = node.prev
        return tuple(reversed(out))

    @property
    def last_move(self) -> Optional[Edge]:
        return None if self._last is None else self._last.edge

    def apply(self, e: Sequence[int]) -> "GameState":
        edge = Edge.of(*e)
        g = self.graph
        if not g.is_legal_move(edge):
            if not g.has_legal_move():
                raise GameStateError("game is over: the board is maximal triangle-free")
            g.add_edge(edge)  # raises IllegalMoveError with the witness
        role = self.to_move
        rows = list(g.rows)
        rows[edge.u] |= 1 << edge.v
        rows[edge.v] |= 1 << edge.u
        return GameState(Graph(g.n, rows, g.m + 1), self.config, _Move(role, edge, self._last))

    def is_terminal(self) -> bool:
        return not self.graph.has_legal_move()

    def score(self) -> int:
        if not self.is_terminal():
            raise GameStateError("score is only defined on terminal positions")
        return self.graph.m

    def __repr__(self) -> str:
        return f"GameState(n={self.graph.n}, edges={self.graph.m}, to_move={self.to_move.value})"


def new_game(config: GameConfig) -> GameState:
    return GameState(Graph(config.n), config)


def apply(state: GameState, e: Sequence[int]) -> GameState:
    return state.apply(e)


def is_terminal(state: GameState) -> bool:
    return state.is_terminal()


def score(state: GameState) -> int:
    return state.score()


class LegalMoveIndex:
    """Lazy pool of candidate moves along one line of play.

    Legality only ever decreases as edges are added, so a pair found illegal
    never has to be looked at again.  The lowest-lexicographic cursor and the
    sampling pool both discard pairs on first failure, giving amortised O(1)
    terminal detection.  Never share an index between diverging lines.
    """

    def __init__(self, n: int):
        self.n = n
        self._pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
        self._cursor = 0
        self._pool = list(range(len(self._pairs)))

    def lowest(self, g: Graph) -> Optional[Edge]:
        rows = g.rows
        pairs = self._pairs
        i = self._cursor
        end = len(pairs)
        while i < end:
            u, v = pairs[i]
            ru = rows[u]
            if not (ru >> v & 1) and not (ru & rows[v]):
                self._cursor = i
                return Edge(u, v)
            i += 1
        self._cursor = end
        return None

    def is_terminal(self, g: Graph) -> bool:
        return self.lowest(g) is None

    def sample(self, g: Graph, rng: random.Random) -> Optional[Edge]:
        """Uniformly random legal move."""
        rows = g.rows
        pairs = self._pairs
        pool = self._pool
        while pool:
            k = rng.randrange(len(pool))
            u, v = pairs[pool[k]]
            ru = rows[u]
            if not (ru >> v & 1) and not (ru & rows[v]):
                return Edge(u, v)
            pool[k] = pool[-1]
            pool.pop()
        return None


# ---------------------------------------------------------------------------
# trace format


def _dump(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"))


def trace_header(config: GameConfig, seed: int, strategies: dict[str, str]) -> str:
    return _dump({"n": config.n, "first_mover": config.first_mover.value, "seed": seed, "strategies": strategies})


def trace_line(ply: int, role: Role, edge: Edge, edges_after: int, annotation: Any = None) -> str:
    return _dump({"ply": ply, "role": role.value, "edge": [edge.u, edge.v], "edges_after": edges_after,
                  "annotation": annotation})


class TraceError(ValueError):
    """A trace that does not parse or does not replay consistently."""


@dataclass
class Replay:
    header: dict
    state: GameState
    annotations: list[Any]

    def to_lines(self) -> list[str]:
        cfg = self.state.config
        lines = [trace_header(cfg, self.header["seed"], self.header["strategies"])]
        for ply, ((role, edge), ann) in enumerate(zip(self.state.history, self.annotations), start=1):
            lines.append(trace_line(ply, role, edge, ply, ann))
        return lines


def replay_trace(lines: Iterable[str]) -> Replay:
    """Rebuild the game from trace lines, checking every recorded field."""
    it: Iterator[str] = iter(lines)
    try:
        header = json.loads(next(it))
        config = GameConfig(int(header["n"]), Role(header["first_mover"]))
        header.setdefault("seed", None)
        header.setdefault("strategies", {})
    except (StopIteration, KeyError, ValueError) as exc:
        raise TraceError(f"bad trace header: {exc}") from exc
    state = new_game(config)
    annotations = []
    for expected_ply, line in enumerate(it, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            ply, role, (u, v), after = rec["ply"], Role(rec["role"]), rec["edge"], rec["edges_after"]
        except (KeyError, ValueError, TypeError) as exc:
            raise TraceError(f"bad trace line {expected_ply}: {exc}") from exc
        if ply != expected_ply:
            raise TraceError(f"ply {ply} out of sequence (expected {expected_ply})")
        if role is not state.to_move:
            raise TraceError(f"ply {ply}: {role.value} moved out of turn")
        try:
            state = state.apply((u, v))
        except (IllegalMoveError, GameStateError, GraphError) as exc:
            raise TraceError(f"ply {ply}: {exc}") from exc
        if state.graph.m != after:
            raise TraceError(f"ply {ply}: edges_after {after} != {state.graph.m}")
        annotations.append(rec.get("annotation"))
    return Replay(header, state, annotations)
