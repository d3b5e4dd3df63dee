"""Simple undirected graphs with bit-row adjacency.

Every vertex owns one Python ``int`` whose set bits are its neighbours.  Python
integers are arbitrary precision, so the same representation serves small and
large boards.  The hot operation, the triangle-free legality test, is a single
row intersection.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence


class GraphError(ValueError):
    """Raised for out-of-range vertices and malformed graph input."""


class IllegalMoveError(GraphError):
    """An edge that is already present or would close a triangle."""

    def __init__(self, edge: "Edge", witness: Optional[int], message: str = ""):
        self.edge = edge
        self.witness = witness
        if not message:
            if witness is None:
                message = f"edge {edge.u}-{edge.v} is already present"
            else:
                message = f"edge {edge.u}-{edge.v} closes a triangle through {witness}"
        super().__init__(message)


class Edge(NamedTuple):
    u: int
    v: int

    @classmethod
    def of(cls, a: int, b: int) -> "Edge":
        if a == b:
            raise GraphError(f"loop at vertex {a}")
        return cls(a, b) if a < b else cls(b, a)


def iter_bits(x: int) -> Iterator[int]:
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def lowest_bit(x: int) -> int:
    return (x & -x).bit_length() - 1


def to_mask(vertices: Iterable[int] | int) -> int:
    if isinstance(vertices, int):
        return vertices
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


class Graph:
    """Immutable simple graph on vertices ``0..n-1``."""

    __slots__ = ("n", "rows", "m")

    def __init__(self, n: int, rows: Optional[Sequence[int]] = None, m: Optional[int] = None):
        if n < 0:
            raise GraphError("vertex count must be non-negative")
        self.n = n
        if rows is None:
            self.rows: tuple[int, ...] = (0,) * n
            self.m = 0
        else:
            if len(rows) != n:
                raise GraphError("row count does not match n")
            self.rows = tuple(rows)
            self.m = m if m is not None else sum(r.bit_count() for r in self.rows) // 2

    # construction ---------------------------------------------------------

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], checked: bool = False) -> "Graph":
        g = cls(n)
        for a, b in edges:
            g = g.add_edge(Edge.of(a, b), checked=checked)
        return g

    @classmethod
    def path(cls, n: int, vertices: Sequence[int]) -> "Graph":
        return cls.from_edges(n, zip(vertices, vertices[1:]))

    @classmethod
    def cycle(cls, n: int, vertices: Sequence[int]) -> "Graph":
        vs = list(vertices)
        return cls.from_edges(n, zip(vs, vs[1:] + vs[:1]))

    # queries --------------------------------------------------------------

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise GraphError(f"vertex {v} out of range for n={self.n}")

    def has_edge(self, a: int, b: int) -> bool:
        self._check_vertex(a)
        self._check_vertex(b)
        return bool(self.rows[a] >> b & 1)

    def neighbors(self, v: int) -> list[int]:
        return list(iter_bits(self.rows[v]))

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()

    def edges(self) -> list[Edge]:
        out = []
        for u, row in enumerate(self.rows):
            for v in iter_bits(row >> (u + 1)):
                out.append(Edge(u, u + 1 + v))
        return out

    def common_neighbors(self, a: int, b: int) -> int:
        return self.rows[a] & self.rows[b]

    def is_legal_move(self, e: Sequence[int]) -> bool:
        a, b = e
        self._check_vertex(a)
        self._check_vertex(b)
        if a == b:
            raise GraphError(f"loop at vertex {a}")
        rows = self.rows
        return not (rows[a] >> b & 1) and not (rows[a] & rows[b])

    def ball2(self, v: int) -> int:
        """Mask of vertices at distance at most 2 from ``v`` (``v`` included)."""
        rows = self.rows
        acc = rows[v] | (1 << v)
        x = rows[v]
        while x:
            low = x & -x
            acc |= rows[low.bit_length() - 1]
            x ^= low
        return acc

    def legal_partners(self, v: int) -> int:
        """Mask of vertices ``w`` such that ``v-w`` is a legal move."""
        return self.full_mask & ~self.ball2(v)

    def legal_moves(self) -> list[Edge]:
        out = []
        for u in range(self.n):
            row = self.legal_partners(u) >> (u + 1)
            for v in iter_bits(row):
                out.append(Edge(u, u + 1 + v))
        return out

    def has_legal_move(self) -> bool:
        return any(self.legal_partners(u) >> (u + 1) for u in range(self.n))

    def has_triangle(self) -> bool:
        rows = self.rows
        for u in range(self.n):
            for v in iter_bits(rows[u] >> (u + 1)):
                if rows[u] & rows[u + 1 + v]:
                    return True
        return False

    def is_maximal_triangle_free(self) -> bool:
        return not self.has_legal_move()

    # mutation (returns new graphs) ----------------------------------------

    def add_edge(self, e: Sequence[int], checked: bool = True) -> "Graph":
        a, b = e
        self._check_vertex(a)
        self._check_vertex(b)
        edge = Edge.of(a, b)
        rows = self.rows
        if rows[a] >> b & 1:
            if checked:
                raise IllegalMoveError(edge, None)
            return self
        if checked:
            common = rows[a] & rows[b]
            if common:
                raise IllegalMoveError(edge, lowest_bit(common))
        new = list(rows)
        new[a] |= 1 << b
        new[b] |= 1 << a
        return Graph(self.n, new, self.m + 1)

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph in which old vertex ``v`` becomes ``perm[v]``."""
        new = [0] * self.n
        for v, row in enumerate(self.rows):
            acc = 0
            for w in iter_bits(row):
                acc |= 1 << perm[w]
            new[perm[v]] = acc
        return Graph(self.n, new, self.m)

    def induced(self, vertices: Sequence[int]) -> "Graph":
        index = {v: i for i, v in enumerate(vertices)}
        edges = [(index[a], index[b]) for a, b in self.edges() if a in index and b in index]
        return Graph.from_edges(len(vertices), edges)

    # structure ------------------------------------------------------------

    def component_masks(self, within: Optional[int] = None) -> list[int]:
        """Connected components as vertex masks, ordered by lowest vertex."""
        rows = self.rows
        remaining = self.full_mask if within is None else within
        out = []
        while remaining:
            seed = remaining & -remaining
            comp = seed
            frontier = seed
            while frontier:
                nxt = 0
                x = frontier
                while x:
                    low = x & -x
                    nxt |= rows[low.bit_length() - 1]
                    x ^= low
                frontier = nxt & ~comp
                comp |= frontier
            out.append(comp)
            remaining &= ~comp
        return out

    def components(self) -> list[list[int]]:
        return [list(iter_bits(c)) for c in self.component_masks()]

    def component_of(self, v: int) -> int:
        rows = self.rows
        comp = frontier = 1 << v
        while frontier:
            nxt = 0
            for w in iter_bits(frontier):
                nxt |= rows[w]
            frontier = nxt & ~comp
            comp |= frontier
        return comp

    def distance(self, a: int, b: int) -> float:
        self._check_vertex(a)
        self._check_vertex(b)
        if a == b:
            return 0
        rows = self.rows
        seen = frontier = 1 << a
        d = 0
        target = 1 << b
        while frontier:
            d += 1
            nxt = 0
            for w in iter_bits(frontier):
                nxt |= rows[w]
            frontier = nxt & ~seen
            if frontier & target:
                return d
            seen |= frontier
        return float("inf")

    def distances_from(self, a: int) -> list[float]:
        dist: list[float] = [float("inf")] * self.n
        dist[a] = 0
        queue = deque([a])
        while queue:
            v = queue.popleft()
            for w in iter_bits(self.rows[v]):
                if dist[w] == float("inf"):
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return dist

    # serialization --------------------------------------------------------

    def to_text(self) -> str:
        return f"n:{self.n};edges:" + ",".join(f"{u}-{v}" for u, v in self.edges())

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        try:
            head, body = text.strip().split(";", 1)
            if not head.startswith("n:") or not body.startswith("edges:"):
                raise ValueError
            n = int(head[2:])
            items = body[len("edges:"):]
            edges = []
            if items:
                for item in items.split(","):
                    a, b = item.split("-")
                    edges.append((int(a), int(b)))
        except ValueError as exc:
            raise GraphError(f"malformed graph text: {text!r}") from exc
        return cls.from_edges(n, edges)

    # dunder ---------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.n, self.rows))

    def __repr__(self) -> str:
        return f"Graph({self.to_text()!r})"


@dataclass(frozen=True)
class StructureReport:
    """Lowest-lexicographic witnesses of the small structures the builder reuses.

    ``p4`` is an induced path (endpoints non-adjacent).  ``far_pair`` is the
    lowest pair of allowed vertices lying in one component at distance at
    least 3.
    """

    p4: Optional[tuple[int, int, int, int]]
    p3: Optional[tuple[int, int, int]]
    p2: Optional[tuple[int, int]]
    far_pair: Optional[tuple[int, int]]


def find_p3(g: Graph, allowed: int) -> Optional[tuple[int, int, int]]:
    rows = g.rows
    for a in iter_bits(allowed):
        for b in iter_bits(rows[a] & allowed):
            rest = rows[b] & allowed & ~(1 << a) & ~((1 << (a + 1)) - 1)
            if rest:
                return (a, b, lowest_bit(rest))
    return None


def find_p4(g: Graph, allowed: int) -> Optional[tuple[int, int, int, int]]:
    rows = g.rows
    for a in iter_bits(allowed):
        for b in iter_bits(rows[a] & allowed):
            for c in iter_bits(rows[b] & allowed & ~(1 << a) & ~rows[a]):
                rest = rows[c] & allowed & ~(1 << b) & ~(1 << a) & ~rows[a] & ~rows[b]
                rest &= ~((1 << (a + 1)) - 1)
                if rest:
                    return (a, b, c, lowest_bit(rest))
    return None


def find_p2(g: Graph, allowed: int) -> Optional[tuple[int, int]]:
    rows = g.rows
    for a in iter_bits(allowed):
        rest = rows[a] & allowed & ~((1 << (a + 1)) - 1)
        if rest:
            return (a, lowest_bit(rest))
    return None


def find_far_pair(g: Graph, allowed: int) -> Optional[tuple[int, int]]:
    for comp in g.component_masks():
        inside = comp & allowed
        for a in iter_bits(inside):
            far = inside & ~g.ball2(a) & ~((1 << (a + 1)) - 1)
            if far:
                return (a, lowest_bit(far))
    return None


def find_structures(g: Graph, allowed: Iterable[int] | int) -> StructureReport:
    mask = to_mask(allowed)
    if mask & ~g.full_mask:
        raise GraphError("allowed set contains vertices outside the graph")
    return StructureReport(
        p4=find_p4(g, mask),
        p3=find_p3(g, mask),
        p2=find_p2(g, mask),
        far_pair=find_far_pair(g, mask),
    )
