import random
from dataclasses import replace

import pytest

from trisat.adversaries import SUITE, Adversary, AdversarySpec
from trisat.builder import (BuilderMemory, Draft, MoveClass, Phase, StrategyGapError, builder_move,
                            c5_completions, choose_robust_move, classify_move, endgame_policy, find_c5_completion,
                            find_c5_cycles, most_constrained, on_opponent_move, robust_completions, seed_selection)
from trisat.count import CountBreakdown
from trisat.game import GameConfig, GameState, LegalMoveIndex, Role, new_game
from trisat.graph import Edge, Graph, iter_bits, to_mask

from interference import explore, new_stats, setup
from test_graph import random_triangle_free


def _state(g: Graph, first=Role.MINIMIZER) -> GameState:
    return GameState(g, GameConfig(g.n, first))


def _mem(n, **kw) -> BuilderMemory:
    draft = Draft(count_before=CountBreakdown(n, 0), start_comp=(0,) * n)
    return replace(BuilderMemory.initial(n), draft=draft, **kw)


# --- opening and seeds ---------------------------------------------------------


def test_opening_move_on_empty_board():
    e, mem = builder_move(new_game(GameConfig(13)), BuilderMemory.initial(13))
    assert e == Edge(0, 1)
    assert mem.phase is Phase.SEED_P4


def test_seed_plan_reuses_p3():
    g = Graph.path(8, [0, 1, 2])
    plan = seed_selection(g, range(8))
    assert plan.edges == [Edge(2, 3)]


def test_seed_plan_prefers_p3_with_far_vertex():
    g = Graph.path(8, [0, 1, 2, 3]).add_edge((3, 4))  # P5: a P4 already exists
    assert seed_selection(g, range(8)).edges == []
    g = Graph.from_edges(9, [(0, 1), (1, 2), (2, 3)])
    u = to_mask([0, 1, 2, 3, 5, 6, 7, 8]) & ~(1 << 0)
    plan = seed_selection(g, u)
    assert len(plan.edges) == 1


def test_seed_plan_from_p2_takes_two_moves():
    g = Graph.from_edges(8, [(0, 1)])
    plan = seed_selection(g, range(8))
    assert len(plan.edges) == 2
    assert len(plan.path) == 4


def test_seed_plan_from_nothing_takes_three_moves():
    plan = seed_selection(Graph(8), range(8))
    assert plan.edges == [Edge(0, 1), Edge(1, 2), Edge(2, 3)]
    assert plan.kind == "fresh"


def test_seed_plan_edges_are_legal_and_build_a_path():
    rng = random.Random(8)
    for _ in range(300):
        n = rng.randint(8, 16)
        g = random_triangle_free(n, rng, rng.randint(0, n))
        u = {v for v in range(n) if rng.random() < 0.9}
        plan = seed_selection(g, u)
        if plan is None:
            continue
        h = g
        for e in plan.edges:
            assert h.is_legal_move(e)
            h = h.add_edge(e)
        p = plan.path
        assert len(p) == 4 and all(v in u for v in p)
        assert all(h.has_edge(a, b) for a, b in zip(p, p[1:]))
        assert not h.has_edge(p[0], p[3]) and not h.has_edge(p[0], p[2]) and not h.has_edge(p[1], p[3])


# --- completions ---------------------------------------------------------------


def test_completion_of_a_path():
    g = Graph.path(6, range(5))
    mem = _mem(6, first=(0, 1, 2, 3), second=(4,))
    assert find_c5_completion(g, mem) == Edge(0, 4)


def test_completion_absent_when_blocked():
    g = Graph.path(6, range(5)).add_edge((0, 5)).add_edge((4, 5))
    mem = _mem(6, first=(0, 1, 2, 3), second=(4,))
    assert find_c5_completion(g, mem) is None


def test_first_p4_closed_into_c4_starts_second_structure():
    s = new_game(GameConfig(13))
    mem = BuilderMemory.initial(13)
    for _ in range(3):
        e, mem = builder_move(s, mem)
        s = s.apply(e)
        reply = s.graph.legal_moves()[-1]
        if len(mem.first) == 4:
            reply = Edge.of(mem.first[0], mem.first[3])
        s = s.apply(reply)
        mem = on_opponent_move(mem, reply, s.graph)
    assert mem.first_closed and mem.phase is Phase.C4_BUILD_P4
    e, mem = builder_move(s, mem)
    assert not (to_mask(e) & s.graph.component_of(mem.first[0]))
    assert s.graph.distance(e.u, e.v) == float("inf")


def test_connected_paths_answered_with_completion():
    # first P4 0-1-2-3, second P3 4-5-6, opponent joins ends 3 and 4
    g = Graph.from_edges(12, [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (3, 4)])
    mem = _mem(12, first=(0, 1, 2, 3), second=(4, 5, 6), phase=Phase.JOIN_PATHS)
    e, mem2 = builder_move(_state(g), mem)
    assert e in c5_completions(g, mem.construction)
    assert mem2.phase is Phase.COMPLETE and len(mem2.completed) == 1
    cyc = mem2.completed[0]
    h = g.add_edge(e)
    assert all((h.rows[v] & to_mask(cyc)).bit_count() == 2 for v in cyc)


# --- opponent classification ---------------------------------------------------


def test_external_move_classification():
    g = Graph.path(12, [0, 1, 2, 3]).add_edge((8, 9))
    mem = _mem(12, first=(0, 1, 2, 3), phase=Phase.SECOND_PATH)
    assert classify_move(mem, (8, 9)) is MoveClass.EXTERNAL
    mem2 = on_opponent_move(mem, (8, 9), g)
    assert mem2.touched == 0 and mem2.last_class is MoveClass.EXTERNAL


def test_connecting_move_touches_both_ends():
    g = Graph.from_edges(12, [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (3, 4)])
    mem = _mem(12, first=(0, 1, 2, 3), second=(4, 5, 6), phase=Phase.JOIN_PATHS)
    mem2 = on_opponent_move(mem, (3, 4), g)
    assert mem2.last_class is MoveClass.CONNECTED
    assert set(iter_bits(mem2.touched)) == {3, 4}


def test_closing_second_p4_moves_to_ninth_vertex():
    g = Graph.cycle(12, [0, 1, 2, 3]).add_edge((4, 5)).add_edge((5, 6)).add_edge((6, 7)).add_edge((4, 7))
    mem = _mem(12, first=(0, 1, 2, 3), first_closed=True, second=(4, 5, 6, 7), phase=Phase.C4_JOIN)
    mem2 = on_opponent_move(mem, (4, 7), g)
    assert mem2.last_class is MoveClass.CLOSED_P4_TO_C4
    assert mem2.phase is Phase.NINTH_VERTEX


def test_ninth_vertex_joins_most_constrained():
    # second C4 vertex 5 shares a neighbour with two first-C4 vertices
    g = Graph.cycle(14, [0, 1, 2, 3])
    g = Graph.from_edges(14, list(g.edges()) + [(4, 5), (5, 6), (6, 7), (7, 4), (8, 0), (8, 2), (8, 5)])
    mem = _mem(14, first=(0, 1, 2, 3), first_closed=True, second=(4, 5, 6, 7), second_closed=True,
               phase=Phase.NINTH_VERTEX)
    assert most_constrained(g, mem.second, mem.first) == 5
    e, mem2 = builder_move(_state(g), mem)
    assert 5 in e and mem2.ninth in e


# --- robustness ----------------------------------------------------------------


def _robust_brute(g: Graph, vs, m: Edge) -> bool:
    vs = set(vs) | {m.u, m.v}
    g2 = g.add_edge(m)
    comps = c5_completions(g2, vs)
    if not comps:
        return False
    for r in g2.legal_moves():
        g3 = g2.add_edge(r)
        if c5_completions(g3, vs):
            continue
        if any(r.u in c and r.v in c for c in find_c5_cycles(g3, vs)):
            continue
        return False
    return True


def test_killer_reply_shortcut_matches_brute_force():
    rng = random.Random(21)
    checked = robust = 0
    while checked < 1500:
        n = rng.randint(8, 12)
        g = random_triangle_free(n, rng, rng.randint(n - 2, 2 * n))
        vs = rng.sample(range(n), rng.randint(6, min(9, n)))
        cands = [e for e in g.legal_moves() if e.u in vs or e.v in vs]
        for m in cands[:6]:
            fast = robust_completions(g, vs, m) is not None
            assert fast == _robust_brute(g, vs, m), (g.to_text(), vs, m)
            checked += 1
            robust += fast
    assert robust > 50


def test_join_of_p4_and_clean_p3_is_robust():
    g = Graph.from_edges(10, [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6)])
    mem = _mem(10, first=(0, 1, 2, 3), second=(4, 5, 6), phase=Phase.JOIN_PATHS)
    e = choose_robust_move(_state(g), mem, [Edge.of(f, s) for f in (0, 3) for s in (4, 6)])
    comps = robust_completions(g, mem.construction, e)
    assert comps is not None and len(comps) >= 2


def test_no_robust_candidate_raises_with_position():
    g = Graph.from_edges(10, [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6)])
    mem = _mem(10, first=(0, 1, 2, 3), second=(4, 5, 6), phase=Phase.JOIN_PATHS)
    with pytest.raises(StrategyGapError) as info:
        choose_robust_move(_state(g), mem, [Edge(7, 8)])
    assert info.value.graph == g
    assert info.value.to_json()["phase"] == "join_paths"


def test_endgame_policy_lowest_pair():
    g = Graph.from_edges(4, [(0, 1), (1, 2)])  # legal: 0-3, 2-3
    assert endgame_policy(_state(g)) == Edge(0, 3)
    g = Graph.from_edges(4, [(0, 1), (1, 2), (0, 3)])  # only 2-3 is legal
    assert endgame_policy(_state(g)) == Edge(2, 3)
    assert endgame_policy(_state(g), LegalMoveIndex(4)) == Edge(2, 3)


# --- exhaustive interference ---------------------------------------------------


def test_open_p4_plus_p3_survives_all_interference():
    stats = new_stats()
    state, mem = setup(closed=False)
    explore(state, mem, "bobobob", stats)
    assert stats["gaps"] == 0 and stats["open"] == 0
    assert stats["completed"] + stats["robust"] > 300


def test_two_c4_construction_survives_all_interference():
    stats = new_stats()
    state, mem = setup(closed=True)
    explore(state, mem, "bobobcbobob", stats)
    assert stats["gaps"] == 0, stats.get("gap_examples", [])[:3]
    assert stats["open"] == 0
    assert stats["completed"] > 0 and stats["robust"] > 0


def test_c4_branch_with_any_third_reply():
    stats = new_stats()
    state, mem = setup(closed=True)
    explore(state, mem, "bobobobob", stats)
    assert stats["gaps"] == 0 and stats["open"] == 0


# --- whole games ---------------------------------------------------------------


def test_builder_moves_are_legal_and_cycles_disjoint():
    rng = random.Random(0)
    for game in range(60):
        n = rng.choice([13, 18, 24, 30])
        first = rng.choice(list(Role))
        spec = AdversarySpec(SUITE[game % len(SUITE)], seed=game)
        s = new_game(GameConfig(n, first))
        mem = BuilderMemory.initial(n)
        adv = Adversary(spec, n)
        idx = LegalMoveIndex(n)
        while not idx.is_terminal(s.graph):
            if s.to_move is Role.MINIMIZER:
                e, mem = builder_move(s, mem, idx)
                assert s.graph.is_legal_move(e)
                s = s.apply(e)
            else:
                e = adv.move(s, mem, idx)
                s = s.apply(e)
                mem = on_opponent_move(mem, e, s.graph)
                live = to_mask(mem.second + ((mem.ninth,) if mem.ninth is not None else ()))
                assert (mem.touched & live).bit_count() <= 2 * mem.second_replies
        seen = 0
        for cyc in mem.completed:
            m = to_mask(cyc)
            assert not seen & m
            seen |= m
            assert all((s.graph.rows[v] & m).bit_count() == 2 for v in cyc)
        assert mem.u == s.graph.full_mask & ~seen
        assert len(mem.completed) >= (n - 2) // 11
