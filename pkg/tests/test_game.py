import random

import pytest

from trisat.game import (GameConfig, GameState, GameStateError, LegalMoveIndex, Role, TraceError, apply, is_terminal,
                         new_game, replay_trace, score, trace_header, trace_line)
from trisat.graph import Edge, Graph, GraphError, IllegalMoveError


def test_new_game():
    s = new_game(GameConfig(5))
    assert s.graph.m == 0 and s.to_move is Role.MINIMIZER
    s = new_game(GameConfig(2, Role.MAXIMIZER))
    assert s.to_move is Role.MAXIMIZER
    with pytest.raises(GraphError):
        GameConfig(1)


def test_apply_and_rejections():
    s = apply(new_game(GameConfig(4)), (0, 1))
    assert s.graph.m == 1 and s.to_move is Role.MAXIMIZER
    assert s.history == ((Role.MINIMIZER, Edge(0, 1)),)
    s = s.apply((1, 2))
    with pytest.raises(IllegalMoveError) as info:
        s.apply((0, 2))
    assert info.value.witness == 1


def test_move_after_end_is_a_state_error():
    s = new_game(GameConfig(5))
    for e in [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]:
        s = s.apply(e)
    assert is_terminal(s) and score(s) == 5
    with pytest.raises(GameStateError):
        s.apply((0, 2))


def test_scores_of_small_terminals():
    s = new_game(GameConfig(3)).apply((0, 1)).apply((1, 2))
    assert score(s) == 2
    star = new_game(GameConfig(6))
    for v in range(1, 6):
        star = star.apply((0, v))
    assert score(star) == 5


def test_score_requires_terminal():
    with pytest.raises(GameStateError):
        score(new_game(GameConfig(4)))


def _random_game(n, first, rng):
    s = new_game(GameConfig(n, first))
    idx = LegalMoveIndex(n)
    while True:
        e = idx.sample(s.graph, rng)
        if e is None:
            return s
        s = s.apply(e)


def test_random_games_respect_invariants():
    rng = random.Random(1)
    for _ in range(300):
        n = rng.randint(2, 16)
        first = rng.choice(list(Role))
        s = _random_game(n, first, rng)
        g = s.graph
        assert not g.has_triangle() and g.is_maximal_triangle_free()
        assert n - 1 <= score(s) <= n * n // 4
        assert len(s.history) == g.m
        roles = [r for r, _ in s.history]
        assert all(roles[i] is (first if i % 2 == 0 else first.other) for i in range(len(roles)))


def test_index_agrees_with_full_scan():
    rng = random.Random(2)
    for _ in range(200):
        n = rng.randint(2, 12)
        s = new_game(GameConfig(n))
        idx = LegalMoveIndex(n)
        while True:
            legal = s.graph.legal_moves()
            low = idx.lowest(s.graph)
            assert low == (legal[0] if legal else None)
            if not legal:
                break
            e = idx.sample(s.graph, rng)
            assert e in legal
            s = s.apply(e)


def _trace(state: GameState) -> list[str]:
    lines = [trace_header(state.config, 9, {"minimizer": "a", "maximizer": "b"})]
    for ply, (role, e) in enumerate(state.history, start=1):
        lines.append(trace_line(ply, role, e, ply, None))
    return lines


def test_trace_round_trip():
    rng = random.Random(4)
    for _ in range(50):
        s = _random_game(rng.randint(2, 14), rng.choice(list(Role)), rng)
        lines = _trace(s)
        rep = replay_trace(lines)
        assert rep.state.graph == s.graph
        assert rep.to_lines() == lines


def test_trace_rejects_tampering():
    s = _random_game(8, Role.MINIMIZER, random.Random(0))
    lines = _trace(s)
    bad = lines[:2] + [lines[2].replace('"edges_after":2', '"edges_after":3')] + lines[3:]
    with pytest.raises(TraceError):
        replay_trace(bad)
    swapped = lines[:1] + lines[2:3] + lines[1:2] + lines[3:]
    with pytest.raises(TraceError):
        replay_trace(swapped)
    with pytest.raises(TraceError):
        replay_trace(["not json"])
    illegal = lines[:3] + [trace_line(3, s.history[2][0], s.history[0][1], 3)]
    with pytest.raises(TraceError):
        replay_trace(illegal)
