"""The C5-constructing player.

The builder works on one construction at a time, drawn from U (vertices not
yet in one of its completed 5-cycles):

* grow a path on four vertices, reusing whatever the count bonus offers;
* if the opponent leaves the P4 open, build a second P3 from clean vertices
  (touched vertex in the middle) and join the two paths;
* if the opponent closes the P4 into a C4, build a second P4 instead (one end
  kept clean) and join it to the C4;
* if that P4 is closed as well, attach a ninth clean vertex to the most
  constrained vertex of the second C4 and join from there.

Joining moves are not looked up from a catalogue of drawn cases.  Each phase
proposes its candidate joining edges and keeps only *robust* ones: after the
move there must be a C5-completing edge that survives every legal reply.  If
no candidate is robust a :class:`StrategyGapError` is raised with the position
attached, so a hole in the case analysis becomes a concrete counterexample.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional, Sequence

from .count import CountBreakdown, compute_count
from .game import GameState, LegalMoveIndex
from .graph import Edge, Graph, iter_bits, lowest_bit, to_mask

DEFAULT_THRESHOLD = 13


class StrategyGapError(RuntimeError):
    """The builder found no robust continuation; carries the offending position."""

    def __init__(self, reason: str, graph: Graph, memory: "BuilderMemory"):
        super().__init__(reason)
        self.reason = reason
        self.graph = graph
        self.memory = memory
        self.trace: list[str] = []

    def to_json(self) -> dict:
        return {"reason": self.reason, "graph": self.graph.to_text(), "phase": self.memory.phase.value,
                "first": list(self.memory.first), "second": list(self.memory.second),
                "ninth": self.memory.ninth, "touched": list(iter_bits(self.memory.touched))}


class Phase(str, Enum):
    SEED_P4 = "seed_p4"
    AWAIT_P4_REPLY = "await_p4_reply"
    SECOND_PATH = "second_path"
    JOIN_PATHS = "join_paths"
    C4_BUILD_P4 = "c4_build_p4"
    C4_JOIN = "c4_join"
    NINTH_VERTEX = "ninth_vertex"
    COMPLETE = "complete"
    ENDGAME = "endgame"


class MoveClass(str, Enum):
    CLOSED_P4_TO_C4 = "closed_p4_to_c4"
    CONNECTED = "connected_our_structures"
    INTERNAL = "internal_to_cluster"
    TOUCHED = "touched_construction"
    EXTERNAL = "external_free_move"


# Upper bounds on the count reduction per scenario class ("other" only gets
# the global bound).
TABLE1_BOUNDS = {
    "G1-G2": 9,
    "G3": 9,
    "G4-G6": 10,
    "G7-G12": 11,
    "G13": 8,
    "G14-G15": 9,
    "G16-G17": 9,
    "G18-G25": 10,
    "G26-G29": 8,
    "G30-G39": 11,
    "other": 11,
}


@dataclass(frozen=True)
class ScenarioLog:
    scenario: str
    cycle: tuple[int, ...]
    components_used: int
    builder_moves: int
    opponent_moves: int
    opponent_unconstrained_moves: int
    leftover_structure: str
    distance3_left: bool
    count_before: int
    count_after: int
    widened: bool = False

    @property
    def reduction(self) -> int:
        return self.count_before - self.count_after

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario, "cycle": list(self.cycle), "components_used": self.components_used,
            "builder_moves": self.builder_moves, "opponent_moves": self.opponent_moves,
            "opponent_unconstrained_moves": self.opponent_unconstrained_moves,
            "leftover_structure": self.leftover_structure, "distance3_left": self.distance3_left,
            "count_before": self.count_before, "count_after": self.count_after, "widened": self.widened,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ScenarioLog":
        return cls(d["scenario"], tuple(d["cycle"]), d["components_used"], d["builder_moves"],
                   d["opponent_moves"], d["opponent_unconstrained_moves"], d["leftover_structure"],
                   d["distance3_left"], d["count_before"], d["count_after"], d.get("widened", False))


@dataclass(frozen=True)
class Draft:
    """Accounting for the construction in progress."""

    count_before: CountBreakdown
    start_comp: tuple[int, ...]
    builder_moves: int = 0
    opponent_moves: int = 0
    free_moves: int = 0
    connection: Optional[tuple] = None
    ninth_internal: bool = False
    ninth_builder_moves: int = 0
    widened: bool = False
    opponent_completed: bool = False
    cycle: tuple[int, ...] = ()
    leftover: tuple[int, ...] = ()
    scenario: str = ""


@dataclass(frozen=True)
class BuilderMemory:
    n: int
    u: int
    completed: tuple[tuple[int, ...], ...] = ()
    first: tuple[int, ...] = ()
    first_closed: bool = False
    second: tuple[int, ...] = ()
    second_closed: bool = False
    ninth: Optional[int] = None
    touched: int = 0
    phase: Phase = Phase.SEED_P4
    plan: tuple[tuple[str, int], ...] = ()
    expect_completion: bool = False
    second_replies: int = 0
    draft: Optional[Draft] = None
    ledger: tuple[ScenarioLog, ...] = ()
    last_class: Optional[MoveClass] = None
    threshold: int = DEFAULT_THRESHOLD
    strict: bool = False

    @classmethod
    def initial(cls, n: int, threshold: int = DEFAULT_THRESHOLD, strict: bool = False) -> "BuilderMemory":
        return cls(n=n, u=(1 << n) - 1, threshold=threshold, strict=strict)

    @property
    def construction(self) -> tuple[int, ...]:
        extra = () if self.ninth is None else (self.ninth,)
        return self.first + self.second + extra

    @property
    def construction_mask(self) -> int:
        return to_mask(self.construction)

    def annotation(self) -> dict:
        return {"phase": self.phase.value, "first": list(self.first), "second": list(self.second),
                "ninth": self.ninth, "c5": len(self.completed)}


# ---------------------------------------------------------------------------
# C5 completions


def c5_completions(g: Graph, vertices: Iterable[int]) -> dict[Edge, tuple[int, ...]]:
    """Legal edges closing a 5-cycle on ``vertices``, each with one such cycle."""
    vs = sorted(set(vertices))
    vmask = to_mask(vs)
    rows = g.rows
    out: dict[Edge, tuple[int, ...]] = {}
    for x in vs:
        rx = rows[x]
        for p in iter_bits(rows[x] & vmask):
            for q in iter_bits(rows[p] & vmask & ~(1 << x)):
                for r in iter_bits(rows[q] & vmask & ~(1 << x) & ~(1 << p)):
                    cand = rows[r] & vmask & ~((1 << (x + 1)) - 1) & ~(1 << p) & ~(1 << q)
                    for y in iter_bits(cand):
                        if rx >> y & 1 or rx & rows[y]:
                            continue
                        e = Edge(x, y)
                        if e not in out:
                            out[e] = (x, p, q, r, y)
    return out


def find_c5_cycles(g: Graph, vertices: Iterable[int]) -> list[tuple[int, ...]]:
    """5-cycles already present among ``vertices``."""
    vs = sorted(set(vertices))
    vmask = to_mask(vs)
    rows = g.rows
    seen = set()
    out = []
    for x in vs:
        above = vmask & ~((1 << (x + 1)) - 1)
        for p in iter_bits(rows[x] & above):
            for q in iter_bits(rows[p] & above):
                for r in iter_bits(rows[q] & above & ~(1 << p)):
                    for y in iter_bits(rows[r] & above & rows[x] & ~(1 << p) & ~(1 << q)):
                        key = frozenset((x, p, q, r, y))
                        if key not in seen:
                            seen.add(key)
                            out.append((x, p, q, r, y))
    return out


def find_c5_completion(g: Graph, mem: BuilderMemory) -> Optional[Edge]:
    comps = c5_completions(g, mem.construction)
    return min(comps) if comps else None


def _edge_legal(rows: Sequence[int], a: int, b: int) -> bool:
    return not (rows[a] >> b & 1) and not (rows[a] & rows[b])


def robust_completions(g: Graph, vertices: Iterable[int], move: Edge) -> Optional[dict[Edge, tuple]]:
    """Completions after ``move`` if no single legal reply can kill them all."""
    vs = set(vertices) | {move.u, move.v}
    g2 = g.add_edge(move, checked=False)
    comps = c5_completions(g2, vs)
    if not comps:
        return None
    rows = g2.rows
    a, b = next(iter(comps))
    killers = [(a, y) for y in iter_bits(rows[b])] + [(b, y) for y in iter_bits(rows[a])]
    for p, q in killers:
        if p == q or not _edge_legal(rows, p, q):
            continue
        reply = Edge.of(p, q)
        if reply in comps:
            continue
        rp = rows[p] | 1 << q
        rq = rows[q] | 1 << p
        alive = False
        for c, d in comps:
            rc = rp if c == p else rq if c == q else rows[c]
            rd = rp if d == p else rq if d == q else rows[d]
            if not (rc >> d & 1) and not (rc & rd):
                alive = True
                break
        if alive:
            continue
        if p in vs and q in vs:
            g3 = g2.add_edge(reply, checked=False)
            if c5_completions(g3, vs) or find_c5_cycles(g3, vs):
                continue
        return None
    return comps


def choose_robust_move(state: GameState, mem: BuilderMemory, candidates: Sequence[Sequence[int]]) -> Edge:
    """Best candidate after which a C5 completion cannot be prevented."""
    g = state.graph
    best = None
    best_key = None
    vs = mem.construction
    for c in candidates:
        e = Edge.of(*c)
        if not g.is_legal_move(e):
            continue
        comps = robust_completions(g, vs, e)
        if comps is None:
            continue
        key = (-len(comps), e)
        if best_key is None or key < best_key:
            best, best_key = e, key
    if best is None:
        raise StrategyGapError(f"no robust move among {len(candidates)} candidates in phase {mem.phase.value}",
                               g, mem)
    return best


# ---------------------------------------------------------------------------
# fresh vertices and seed plans


def fresh_vertices(g: Graph, u: int, avoid: int, k: int) -> list[int]:
    """Up to ``k`` U-vertices from distinct components that avoid ``avoid``.

    Isolated vertices first (lowest index), then the lowest-degree vertices of
    other untouched components.
    """
    rows = g.rows
    picked: list[int] = []
    used = avoid
    isolated = [v for v in iter_bits(u & ~avoid) if not rows[v]]
    for v in isolated:
        if len(picked) == k:
            return picked
        picked.append(v)
        used |= 1 << v
    if len(picked) == k:
        return picked
    pool = []
    for comp in g.component_masks():
        if comp & used or not comp & u:
            continue
        inside = comp & u
        v = min(iter_bits(inside), key=lambda w: (rows[w].bit_count(), w))
        pool.append((rows[v].bit_count(), v))
    for _, v in sorted(pool):
        if len(picked) == k:
            break
        picked.append(v)
    return picked


@dataclass(frozen=True)
class SeedPlan:
    """How the first P4 of a construction is obtained.

    ``initial`` is the path already present in U; each step attaches one
    vertex to the front or back of the growing path.
    """

    initial: tuple[int, ...]
    steps: tuple[tuple[str, int], ...]
    kind: str

    @property
    def edges(self) -> list[Edge]:
        path = list(self.initial)
        out = []
        for side, v in self.steps:
            end = path[0] if side == "front" else path[-1]
            out.append(Edge.of(end, v))
            if side == "front":
                path.insert(0, v)
            else:
                path.append(v)
        return out

    @property
    def path(self) -> tuple[int, ...]:
        path = list(self.initial)
        for side, v in self.steps:
            if side == "front":
                path.insert(0, v)
            else:
                path.append(v)
        return tuple(path)


def _far_mask(g: Graph, u: int, v: int) -> int:
    return g.component_of(v) & u & ~g.ball2(v)


def seed_selection(g: Graph, u: Iterable[int] | int) -> Optional[SeedPlan]:
    """Cheapest way to a P4 inside U, or ``None`` if U cannot supply one."""
    from .graph import find_p2, find_p4

    umask = to_mask(u)
    rows = g.rows
    p4 = find_p4(g, umask)
    if p4 is not None:
        return SeedPlan(p4, (), "p4")

    p3_plain = None
    for b in iter_bits(umask):
        nb = rows[b] & umask
        if nb.bit_count() < 2:
            continue
        ends = list(iter_bits(nb))
        for i, a in enumerate(ends):
            for c in ends[i + 1:]:
                if p3_plain is None:
                    p3_plain = (a, b, c)
                for x, z in ((a, c), (c, a)):
                    far = _far_mask(g, umask, x) & ~rows[z] & ~rows[b]
                    if far:
                        return SeedPlan((z, b, x), (("back", lowest_bit(far)),), "p3+far")
    if p3_plain is not None:
        fresh = fresh_vertices(g, umask, to_mask(p3_plain), 1)
        if fresh:
            return SeedPlan(p3_plain, (("back", fresh[0]),), "p3")

    p2_plain = None
    for a in iter_bits(umask):
        for b in iter_bits(rows[a] & umask):
            if p2_plain is None and a < b:
                p2_plain = (a, b)
            far = _far_mask(g, umask, a) & ~rows[b]
            if far:
                d = lowest_bit(far)
                fresh = fresh_vertices(g, umask, g.component_of(a), 1)
                if fresh:
                    return SeedPlan((a, b), (("front", d), ("back", fresh[0])), "p2+far")
    if p2_plain is not None:
        fresh = fresh_vertices(g, umask, g.component_of(p2_plain[0]), 2)
        if len(fresh) == 2:
            return SeedPlan(p2_plain, (("front", fresh[0]), ("back", fresh[1])), "p2")

    for comp in g.component_masks():
        inside = comp & umask
        for p in iter_bits(inside):
            far = inside & ~g.ball2(p)
            if far:
                q = lowest_bit(far)
                fresh = fresh_vertices(g, umask, comp, 2)
                if len(fresh) == 2:
                    return SeedPlan((p,), (("back", q), ("front", fresh[0]), ("back", fresh[1])), "far-pair")
                break
    fresh = fresh_vertices(g, umask, 0, 4)
    if len(fresh) == 4:
        v1, v2, v3, v4 = fresh
        return SeedPlan((v1,), (("back", v2), ("back", v3), ("back", v4)), "fresh")
    return None


# ---------------------------------------------------------------------------
# opponent moves


def _is_closing(path: tuple[int, ...], a: int, b: int) -> bool:
    return len(path) == 4 and {a, b} == {path[0], path[3]}


def _sync(g: Graph, mem: BuilderMemory) -> BuilderMemory:
    rows = g.rows
    first_closed = len(mem.first) == 4 and bool(rows[mem.first[0]] >> mem.first[3] & 1)
    second_closed = len(mem.second) == 4 and bool(rows[mem.second[0]] >> mem.second[3] & 1)
    phase = mem.phase
    if not mem.expect_completion:
        if phase is Phase.AWAIT_P4_REPLY:
            phase = Phase.C4_BUILD_P4 if first_closed else Phase.SECOND_PATH
        elif phase in (Phase.SECOND_PATH, Phase.JOIN_PATHS) and first_closed:
            phase = Phase.C4_BUILD_P4
        elif phase is Phase.C4_JOIN and second_closed:
            phase = Phase.NINTH_VERTEX
    if (first_closed, second_closed, phase) == (mem.first_closed, mem.second_closed, mem.phase):
        return mem
    return replace(mem, first_closed=first_closed, second_closed=second_closed, phase=phase)


def classify_move(mem: BuilderMemory, e: Sequence[int]) -> MoveClass:
    a, b = e
    w = mem.construction_mask
    ina, inb = bool(w >> a & 1), bool(w >> b & 1)
    if ina and inb:
        if _is_closing(mem.first, a, b) or _is_closing(mem.second, a, b):
            return MoveClass.CLOSED_P4_TO_C4
        f = to_mask(mem.first)
        rest = w & ~f
        if (f >> a & 1 and rest >> b & 1) or (f >> b & 1 and rest >> a & 1):
            return MoveClass.CONNECTED
        return MoveClass.INTERNAL
    if ina or inb:
        return MoveClass.TOUCHED
    return MoveClass.EXTERNAL


def on_opponent_move(mem: BuilderMemory, e: Sequence[int], g: Graph) -> BuilderMemory:
    """Record an opponent edge (``g`` already contains it)."""
    if mem.phase is Phase.ENDGAME:
        return mem
    a, b = Edge.of(*e)
    cls = classify_move(mem, (a, b))
    w = mem.construction_mask
    touched = mem.touched | (w & ((1 << a) | (1 << b)))
    draft = mem.draft
    if draft is not None:
        free = cls in (MoveClass.EXTERNAL, MoveClass.TOUCHED)
        changes = dict(opponent_moves=draft.opponent_moves + 1, free_moves=draft.free_moves + int(free))
        if cls is MoveClass.CONNECTED and draft.connection is None and mem.ninth is None:
            changes["connection"] = _connection_info("opponent", mem, a, b)
        if mem.ninth is not None and draft.ninth_builder_moves == 0 and cls in (
                MoveClass.CONNECTED, MoveClass.INTERNAL):
            changes["ninth_internal"] = True
        draft = replace(draft, **changes)
    second_replies = mem.second_replies + 1 if mem.second else 0
    mem = replace(mem, touched=touched, draft=draft, last_class=cls, second_replies=second_replies)
    mem = _sync(g, mem)
    if mem.phase not in (Phase.COMPLETE, Phase.ENDGAME) and mem.second and cls in (
            MoveClass.CONNECTED, MoveClass.INTERNAL):
        cycles = find_c5_cycles(g, mem.construction)
        if cycles:
            cycle = _best_cycle(g, mem, cycles)
            mem = _register_completion(g, mem, cycle, by_opponent=True)
    return mem


def _connection_info(who: str, mem: BuilderMemory, a: int, b: int) -> tuple:
    f = mem.first
    f_vertex = a if a in f else b
    s_vertex = b if f_vertex == a else a
    s = mem.second
    f_end = not mem.first_closed and f_vertex in (f[0], f[-1])
    s_end = bool(s) and s_vertex in (s[0], s[-1])
    return (who, mem.first_closed, len(s), f_end, s_end)


# ---------------------------------------------------------------------------
# completion bookkeeping


def _best_cycle(g: Graph, mem: BuilderMemory, cycles: Sequence[tuple[int, ...]]) -> tuple[int, ...]:
    return max(cycles, key=lambda c: (compute_count(g, mem.u & ~to_mask(c), mem.strict).total,
                                      tuple(-v for v in sorted(c))))


def _register_completion(g: Graph, mem: BuilderMemory, cycle: tuple[int, ...], by_opponent: bool) -> BuilderMemory:
    cmask = to_mask(cycle)
    leftover = tuple(v for v in mem.construction if not cmask >> v & 1)
    draft = mem.draft
    if draft is not None:
        draft = replace(draft, cycle=tuple(cycle), leftover=leftover, opponent_completed=by_opponent)
        draft = replace(draft, scenario=_classify(mem, draft))
    return replace(mem, u=mem.u & ~cmask, completed=mem.completed + (tuple(cycle),), first=(), second=(),
                   ninth=None, touched=0, first_closed=False, second_closed=False, plan=(),
                   expect_completion=False, second_replies=0, phase=Phase.COMPLETE, draft=draft)


def _classify(mem: BuilderMemory, draft: Draft) -> str:
    if draft.opponent_completed or draft.widened:
        return "other"
    if mem.ninth is not None:
        # internal reply that hands us an immediate completion
        immediate = draft.ninth_internal and draft.ninth_builder_moves == 1
        return "G26-G29" if immediate else "G30-G39"
    conn = draft.connection
    if conn is None:
        return "other"
    who, f_closed, s_len, f_end, s_end = conn
    if f_closed:
        if who == "opponent":
            return {2: "G13", 3: "G14-G15", 4: "G16-G17"}.get(s_len, "other")
        return "G18-G25" if s_len == 4 else "other"
    if who == "opponent":
        if s_len == 2:
            return "G1-G2"
        if s_len == 3:
            return "G3" if f_end and s_end else "G4-G6"
        return "other"
    return "G7-G12" if s_len == 3 else "other"


def _leftover_report(g: Graph, mem: BuilderMemory, leftover: tuple[int, ...]) -> tuple[str, bool]:
    lmask = to_mask(leftover) & mem.u
    rows = g.rows
    structure = "none"
    for v in iter_bits(lmask):
        nb = rows[v] & lmask
        if nb & (nb - 1):
            structure = "P3"
            break
        if nb:
            structure = "P2"
    far = any(_far_mask(g, mem.u, v) for v in iter_bits(lmask))
    return structure, far


def _close_ledger(g: Graph, mem: BuilderMemory, count: CountBreakdown) -> BuilderMemory:
    draft = mem.draft
    if draft is None or not draft.cycle:
        return mem
    structure, far = _leftover_report(g, mem, draft.leftover)
    comps = {draft.start_comp[v] for v in draft.cycle + draft.leftover}
    row = ScenarioLog(
        scenario=draft.scenario,
        cycle=draft.cycle,
        components_used=len(comps) - 1,
        builder_moves=draft.builder_moves,
        opponent_moves=draft.opponent_moves,
        opponent_unconstrained_moves=draft.free_moves,
        leftover_structure=structure,
        distance3_left=far,
        count_before=draft.count_before.total,
        count_after=count.total,
        widened=draft.widened,
    )
    return replace(mem, ledger=mem.ledger + (row,), draft=None)


def finish_memory(mem: BuilderMemory, g: Graph) -> BuilderMemory:
    """Close the ledger at the end of the game."""
    return _close_ledger(g, mem, compute_count(g, mem.u, mem.strict))


def _component_ids(g: Graph) -> tuple[int, ...]:
    ids = [0] * g.n
    for i, comp in enumerate(g.component_masks()):
        for v in iter_bits(comp):
            ids[v] = i
    return tuple(ids)


def _begin_construction(g: Graph, mem: BuilderMemory) -> BuilderMemory:
    count = compute_count(g, mem.u, mem.strict)
    mem = _close_ledger(g, mem, count)
    plan = seed_selection(g, mem.u) if count.total >= mem.threshold else None
    if plan is None:
        return replace(mem, phase=Phase.ENDGAME, draft=None)
    draft = Draft(count_before=count, start_comp=_component_ids(g))
    phase = Phase.SEED_P4 if plan.steps else Phase.SECOND_PATH
    return replace(mem, phase=phase, draft=draft, first=plan.initial, plan=plan.steps, second=(), ninth=None,
                   touched=0, first_closed=False, second_closed=False, expect_completion=False,
                   second_replies=0)


# ---------------------------------------------------------------------------
# the move


def endgame_policy(state: GameState, index: Optional[LegalMoveIndex] = None) -> Edge:
    """Lowest-lexicographic legal edge."""
    g = state.graph
    if index is not None:
        e = index.lowest(g)
        if e is not None:
            return e
    else:
        for a in range(g.n):
            row = g.legal_partners(a) >> (a + 1)
            if row:
                return Edge(a, a + 1 + lowest_bit(row))
    raise StrategyGapError("endgame policy called on a terminal position", g, BuilderMemory.initial(g.n))


def _pick_fresh(g: Graph, mem: BuilderMemory, k: int) -> list[int]:
    w = mem.construction_mask
    avoid = 0
    for comp in g.component_masks():
        if comp & w:
            avoid |= comp
    picked = fresh_vertices(g, mem.u & ~w, avoid, k)
    if len(picked) < k:
        rows = g.rows
        for v in iter_bits(mem.u & ~w & ~to_mask(picked)):
            if len(picked) == k:
                break
            if not rows[v] & w and all(not rows[v] >> p & 1 and not rows[v] & rows[p] for p in picked):
                picked.append(v)
    if len(picked) < k:
        raise StrategyGapError(f"no clean vertex left for phase {mem.phase.value}", g, mem)
    return picked


def _count_move(mem: BuilderMemory, **changes) -> BuilderMemory:
    draft = mem.draft
    if draft is not None:
        draft = replace(draft, builder_moves=draft.builder_moves + 1,
                        ninth_builder_moves=draft.ninth_builder_moves + int(mem.ninth is not None))
    return replace(mem, draft=draft, **changes)


def _extend_path(g: Graph, mem: BuilderMemory, path: tuple[int, ...], at_front: bool) -> tuple[Edge, tuple]:
    (x,) = _pick_fresh(g, mem, 1)
    end = path[0] if at_front else path[-1]
    return Edge.of(end, x), ((x,) + path if at_front else path + (x,))


def _grow_second(g: Graph, mem: BuilderMemory) -> tuple[Edge, tuple[int, ...]]:
    s = mem.second
    touched = mem.touched
    if not s:
        v1, v2 = _pick_fresh(g, mem, 2)
        return Edge.of(v1, v2), (v1, v2)
    if len(s) == 2:
        # touched vertex becomes the middle
        front = bool(touched >> s[0] & 1) and not touched >> s[1] & 1
        return _extend_path(g, mem, s, at_front=front)
    # P3 -> P4: extend at a touched end so both ends stay as clean as possible
    front = bool(touched >> s[0] & 1) and not touched >> s[2] & 1
    return _extend_path(g, mem, s, at_front=front)


def _cross(a: Iterable[int], b: Iterable[int]) -> list[Edge]:
    return sorted({Edge.of(x, y) for x in a for y in b if x != y})


def most_constrained(g: Graph, cycle: Sequence[int], others: Sequence[int]) -> int:
    rows = g.rows
    return max(cycle, key=lambda s: (sum(1 for f in others if not _edge_legal(rows, s, f)), -s))


def _widened_candidates(g: Graph, mem: BuilderMemory) -> list[Edge]:
    vs = mem.construction
    cands = [e for e in _cross(vs, vs) if g.is_legal_move(e)]
    try:
        (x,) = _pick_fresh(g, mem, 1)
        cands += _cross([x], vs)
    except StrategyGapError:
        pass
    return cands


def _robust(state: GameState, mem: BuilderMemory, candidates: list[Edge]) -> tuple[Edge, BuilderMemory]:
    try:
        return choose_robust_move(state, mem, candidates), mem
    except StrategyGapError:
        e = choose_robust_move(state, mem, _widened_candidates(state.graph, mem))
        return e, replace(mem, draft=replace(mem.draft, widened=True) if mem.draft else None)


def builder_move(state: GameState, mem: BuilderMemory,
                 index: Optional[LegalMoveIndex] = None) -> tuple[Edge, BuilderMemory]:
    g = state.graph
    if mem.phase is Phase.ENDGAME:
        return endgame_policy(state, index), mem
    if mem.phase is Phase.COMPLETE or mem.draft is None:
        mem = _begin_construction(g, mem)
        if mem.phase is Phase.ENDGAME:
            return endgame_policy(state, index), mem
    mem = _sync(g, mem)

    if mem.second or mem.ninth is not None:
        comps = c5_completions(g, mem.construction)
        if comps:
            best = max(comps, key=lambda e: (
                compute_count(g, mem.u & ~to_mask(comps[e]), mem.strict).total, -e.u, -e.v))
            mem = _count_move(mem)
            if mem.draft is not None and mem.draft.connection is None and mem.ninth is None:
                mem = replace(mem, draft=replace(mem.draft, connection=_connection_info(
                    "builder", mem, *_cross_edge(g, mem))))
            return best, _register_completion(g, mem, comps[best], by_opponent=False)
        if mem.expect_completion:
            e, mem = _robust(state, mem, _widened_candidates(g, mem))
            mem = replace(mem, draft=replace(mem.draft, widened=True) if mem.draft else None)
            return e, _count_move(mem)

    phase = mem.phase
    if phase is Phase.SEED_P4:
        return _seed_step(g, mem)
    if phase is Phase.SECOND_PATH:
        e, s = _grow_second(g, mem)
        nxt = Phase.JOIN_PATHS if len(s) == 3 else Phase.SECOND_PATH
        return e, _count_move(mem, second=s, phase=nxt)
    if phase is Phase.C4_BUILD_P4:
        e, s = _grow_second(g, mem)
        nxt = Phase.C4_JOIN if len(s) == 4 else Phase.C4_BUILD_P4
        return e, _count_move(mem, second=s, phase=nxt)
    if phase in (Phase.JOIN_PATHS, Phase.C4_JOIN):
        e, mem = _robust(state, mem, _cross(mem.first, mem.second))
        if mem.draft is not None and mem.draft.connection is None:
            mem = replace(mem, draft=replace(mem.draft, connection=_connection_info("builder", mem, e.u, e.v)))
        return e, _count_move(mem, expect_completion=True)
    if phase is Phase.NINTH_VERTEX:
        if mem.ninth is None:
            (w,) = _pick_fresh(g, mem, 1)
            s = most_constrained(g, mem.second, mem.first)
            return Edge.of(w, s), _count_move(mem, ninth=w)
        cands = _cross(mem.second + (mem.ninth,), mem.first) + _cross((mem.ninth,), mem.second)
        e, mem = _robust(state, mem, cands)
        return e, _count_move(mem, expect_completion=True)
    if phase is Phase.AWAIT_P4_REPLY:
        return builder_move(state, replace(mem, phase=Phase.SECOND_PATH), index)
    raise StrategyGapError(f"unexpected phase {phase.value}", g, mem)


def _cross_edge(g: Graph, mem: BuilderMemory) -> tuple[int, int]:
    rows = g.rows
    smask = to_mask(mem.second)
    for f in mem.first:
        hit = rows[f] & smask
        if hit:
            return f, lowest_bit(hit)
    return mem.first[0], mem.second[0]


def _seed_step(g: Graph, mem: BuilderMemory) -> tuple[Edge, BuilderMemory]:
    path = mem.first
    side, v = mem.plan[0]
    rows = g.rows
    pmask = to_mask(path)
    end = path[0] if side == "front" else path[-1]
    w = mem.construction_mask
    usable = (mem.u >> v & 1 and not w >> v & 1 and not rows[v] & pmask and _edge_legal(rows, end, v))
    if not usable:
        (v,) = _pick_fresh(g, mem, 1)
    new_path = (v,) + path if side == "front" else path + (v,)
    phase = Phase.AWAIT_P4_REPLY if len(new_path) == 4 else Phase.SEED_P4
    return Edge.of(end, v), _count_move(mem, first=new_path, plan=mem.plan[1:], phase=phase)
