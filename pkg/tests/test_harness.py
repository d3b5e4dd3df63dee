import json
from dataclasses import replace
from fractions import Fraction

import pytest

from trisat.adversaries import SUITE, AdversaryKind
from trisat.builder import TABLE1_BOUNDS, ScenarioLog
from trisat.graph import Graph
from trisat.harness import (BatchConfig, GameRecord, cross_edge_violations, derive_seed, load_records, run_game,
                            score_bound, simulate, summary_csv, table1_audit, verify_guarantees, verify_record)
from trisat.oracles import cross_graph


def test_n13_passive_builds_one_cycle():
    rec = run_game(13, "sat_g", AdversaryKind.PASSIVE, 0)
    assert rec.gap_error is None and rec.c5_count >= 1
    assert rec.verdicts["a_c5_count"] and rec.passed


@pytest.mark.parametrize("kind", list(SUITE))
def test_n24_builds_two_cycles(kind):
    for conv in ("sat_g", "sat_g'"):
        rec = run_game(24, conv, kind, derive_seed(1, kind.value, conv))
        assert rec.c5_count >= 2 and rec.passed


def test_n5_passive_is_a_small_saturated_graph():
    rec = run_game(5, "sat_g", AdversaryKind.PASSIVE, 0)
    g = Graph.from_text(rec.graph_text)
    assert g.is_maximal_triangle_free() and 4 <= rec.score <= 6


def _two_cycles_record(mask: int) -> GameRecord:
    g = cross_graph(mask)
    return GameRecord(n=10, convention="sat_g", adversary="passive", seed=0, score=g.m, c5_count=2,
                      completed=[(0, 1, 2, 3, 4), (5, 6, 7, 8, 9)], ledger=[], graph_text=g.to_text())


def test_eleven_cross_edges_fail_clause_c():
    # orient the unique ten-edge configuration: i joins 5+i and 5+i+2
    ten = sum(1 << (5 * i + (i % 5)) | 1 << (5 * i + (i + 2) % 5) for i in range(5))
    ok = _two_cycles_record(ten)
    assert not cross_edge_violations(Graph.from_text(ok.graph_text), ok.completed)
    # inject an eleventh cross edge without checking legality
    g = Graph.from_text(ok.graph_text)
    edges = list(g.edges()) + [(0, 6)]
    bad = replace(ok, graph_text=Graph.from_edges(10, edges).to_text(), score=len(edges))
    v = verify_record(bad)
    assert not v["c_cross_edges"]
    summary = verify_guarantees([bad])
    assert not summary.ok and any("c_cross_edges" in f for f in summary.failures)


def test_clause_a_threshold_at_13():
    rec = run_game(13, "sat_g", AdversaryKind.PASSIVE, 5)
    assert max(0, (13 - 2) // 11) == 1
    worse = replace(rec, c5_count=0, completed=[])
    assert not verify_record(worse)["a_c5_count"]


def test_score_bound_is_exact_rational():
    assert score_bound(101) == Fraction(26, 121) * 101 * 101 + 303


def test_seeds_are_deterministic_and_distinct():
    assert derive_seed(0, 13, "a") == derive_seed(0, 13, "a")
    assert derive_seed(0, 13, "a") != derive_seed(1, 13, "a")
    cells = BatchConfig((13, 24), SUITE, 3).cells()
    assert len({c[3] for c in cells}) == len(cells)


def test_batch_config_validation():
    with pytest.raises(ValueError):
        BatchConfig((13,), SUITE, 0)
    with pytest.raises(ValueError):
        BatchConfig((13,), SUITE, 1, conventions=("sat_x",))


def test_summary_csv_is_byte_identical(tmp_path):
    cfg = BatchConfig((13, 24), SUITE, 2, master_seed=9, conventions=("sat_g", "sat_g'"))
    a = summary_csv(simulate(cfg))
    b = summary_csv(simulate(cfg))
    assert a == b
    assert a.splitlines()[0] == "n,convention,adversary,seed,score,c5_count,max_count_reduction,gap_error"
    # process pool merges in the same order
    c = summary_csv(simulate(replace(cfg, workers=2)))
    assert a == c


def test_traces_round_trip_through_records(tmp_path):
    cfg = BatchConfig((24,), SUITE, 1, trace_dir=str(tmp_path / "t"), json_path=str(tmp_path / "r.jsonl"))
    recs = simulate(cfg)
    loaded = load_records(str(tmp_path / "r.jsonl"))
    from_traces = load_records(str(tmp_path / "t"))
    key = lambda r: (r.n, r.adversary, r.seed)
    for a, b, c in zip(recs, sorted(loaded, key=key), sorted(from_traces, key=key)):
        assert a.score == b.score == c.score and a.graph_text == b.graph_text == c.graph_text
        assert [r.to_json() for r in a.ledger] == [r.to_json() for r in c.ledger]


def _row(scenario: str, before: int, after: int) -> ScenarioLog:
    return ScenarioLog(scenario=scenario, cycle=(0, 1, 2, 3, 4), components_used=1, builder_moves=5,
                       opponent_moves=4, opponent_unconstrained_moves=0, leftover_structure="P3",
                       distance3_left=True, count_before=before, count_after=after)


def _rec_with(rows) -> GameRecord:
    return GameRecord(n=40, convention="sat_g", adversary="x", seed=0, score=0, c5_count=0, completed=[],
                      ledger=rows, graph_text="n:1;edges:")


def test_audit_examples():
    assert TABLE1_BOUNDS["G1-G2"] == 9 and TABLE1_BOUNDS["G13"] == 8
    assert table1_audit([_rec_with([_row("G1-G2", 30, 21)])]).ok
    rep = table1_audit([_rec_with([_row("G1-G2", 30, 20)])])
    assert not rep.ok and "G1-G2" in rep.exceedances[0]
    assert not table1_audit([_rec_with([_row("G13", 30, 21)])]).ok
    rep = table1_audit([_rec_with([_row("G30-G39", 30, 18)])])
    assert rep.over_eleven and not rep.ok
    # constructions starting at or below the threshold are bucketed but not judged
    assert table1_audit([_rec_with([_row("G13", 13, 0)])]).ok


def test_audit_of_real_games_is_clean():
    recs = simulate(BatchConfig((35, 57), SUITE, 2, master_seed=3, conventions=("sat_g", "sat_g'")))
    assert verify_guarantees(recs).ok
    rep = table1_audit(recs)
    assert rep.ok, rep.exceedances + rep.over_eleven
    assert rep.rows == sum(len(r.ledger) for r in recs) > 0
    assert json.loads(json.dumps(rep.to_json()))["ok"]
