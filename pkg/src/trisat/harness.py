"""Batch simulation of the builder against adversaries, with verdicts from replay."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .adversaries import Adversary, AdversaryKind, AdversarySpec
from .builder import (TABLE1_BOUNDS, BuilderMemory, ScenarioLog, StrategyGapError, builder_move,
                      finish_memory, on_opponent_move)
from .game import GameConfig, LegalMoveIndex, Role, new_game, replay_trace, trace_header, trace_line
from .graph import Graph, iter_bits, to_mask
from .oracles import density_bound

BUILDER_ROLE = Role.MINIMIZER
CONVENTIONS = {"sat_g": Role.MINIMIZER, "sat_g'": Role.MAXIMIZER}
CSV_COLUMNS = ["n", "convention", "adversary", "seed", "score", "c5_count", "max_count_reduction", "gap_error"]


def convention_of(first_mover: Role) -> str:
    return "sat_g" if first_mover is Role.MINIMIZER else "sat_g'"


def derive_seed(master: int, *parts: object) -> int:
    text = "/".join(str(p) for p in (master,) + parts)
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "big")


@dataclass(frozen=True)
class BatchConfig:
    ns: tuple[int, ...]
    adversaries: tuple[AdversaryKind, ...]
    games_per_cell: int = 1
    master_seed: int = 0
    conventions: tuple[str, ...] = ("sat_g",)
    trace_dir: Optional[str] = None
    csv_path: Optional[str] = None
    json_path: Optional[str] = None
    workers: int = 1
    strict: bool = False

    def __post_init__(self) -> None:
        if self.games_per_cell < 1:
            raise ValueError("games per cell must be at least 1")
        for c in self.conventions:
            if c not in CONVENTIONS:
                raise ValueError(f"unknown convention {c!r}")

    def cells(self) -> list[tuple[int, str, AdversaryKind, int]]:
        out = []
        for n in self.ns:
            for conv in self.conventions:
                for kind in self.adversaries:
                    for k in range(self.games_per_cell):
                        out.append((n, conv, kind, derive_seed(self.master_seed, n, conv, kind.value, k)))
        return out


@dataclass
class GameRecord:
    n: int
    convention: str
    adversary: str
    seed: int
    score: int
    c5_count: int
    completed: list[tuple[int, ...]]
    ledger: list[ScenarioLog]
    graph_text: str
    verdicts: dict[str, bool] = field(default_factory=dict)
    gap_error: Optional[str] = None
    trace: Optional[list[str]] = None
    trace_path: Optional[str] = None

    @property
    def max_count_reduction(self) -> int:
        return max((row.reduction for row in self.ledger), default=0)

    @property
    def passed(self) -> bool:
        return self.gap_error is None and all(self.verdicts.values())

    def csv_row(self) -> list:
        return [self.n, self.convention, self.adversary, self.seed, self.score, self.c5_count,
                self.max_count_reduction, self.gap_error or ""]

    def to_json(self) -> dict:
        return {"n": self.n, "convention": self.convention, "adversary": self.adversary, "seed": self.seed,
                "score": self.score, "c5_count": self.c5_count, "completed": [list(c) for c in self.completed],
                "ledger": [r.to_json() for r in self.ledger], "graph": self.graph_text,
                "verdicts": self.verdicts, "gap_error": self.gap_error, "trace_path": self.trace_path}


def play_game(n: int, first_mover: Role, spec: AdversarySpec, strict: bool = False,
              record_trace: bool = True):
    """Builder (minimizer) against ``spec``; returns (state, memory, trace lines, gap)."""
    config = GameConfig(n, first_mover)
    state = new_game(config)
    mem = BuilderMemory.initial(n, strict=strict)
    adv = Adversary(spec, n)
    index = LegalMoveIndex(n)
    lines = [trace_header(config, spec.seed, {"minimizer": "c5-builder", "maximizer": spec.name})] \
        if record_trace else None
    gap: Optional[StrategyGapError] = None
    ply = 0
    while not index.is_terminal(state.graph):
        mover = state.to_move
        if mover is BUILDER_ROLE:
            try:
                e, mem = builder_move(state, mem, index)
            except StrategyGapError as exc:
                gap = exc
                break
            ann = mem.annotation() if lines is not None else None
        else:
            e = adv.move(state, mem, index)
            ann = None
        state = state.apply(e)
        ply += 1
        if mover is not BUILDER_ROLE:
            mem = on_opponent_move(mem, e, state.graph)
        if lines is not None:
            lines.append(trace_line(ply, mover, e, state.graph.m, ann))
    if gap is not None and lines is not None:
        gap.trace = list(lines)
    mem = finish_memory(mem, state.graph)
    return state, mem, lines, gap


def run_game(n: int, convention: str, kind: AdversaryKind, seed: int, strict: bool = False,
             keep_trace: bool = False, trace_dir: Optional[str] = None) -> GameRecord:
    spec = AdversarySpec(kind, seed)
    state, mem, lines, gap = play_game(n, CONVENTIONS[convention], spec, strict=strict)
    replay = replay_trace(lines)
    if replay.state.graph != state.graph:
        raise RuntimeError("trace replay diverged from live play")
    final = replay.state.graph
    rec = GameRecord(n=n, convention=convention, adversary=kind.value, seed=seed, score=final.m,
                     c5_count=len(mem.completed), completed=list(mem.completed), ledger=list(mem.ledger),
                     graph_text=final.to_text(),
                     gap_error=None if gap is None else gap.reason)
    if gap is None:
        rec.verdicts = verify_record(rec, final)
    if keep_trace or gap is not None or trace_dir:
        rec.trace = lines
    if trace_dir:
        os.makedirs(trace_dir, exist_ok=True)
        path = os.path.join(trace_dir, f"n{n}_{convention.replace(chr(39), 'p')}_{kind.value}_{seed}.jsonl")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
            fh.write(json.dumps({"summary": rec.to_json()}, separators=(",", ":")) + "\n")
        rec.trace_path = path
    return rec


# ---------------------------------------------------------------------------
# verdicts


def score_bound(n: int) -> Fraction:
    return density_bound(11) * n * n + 3 * n


def cross_edge_violations(g: Graph, cycles: Sequence[Sequence[int]]) -> list[str]:
    out = []
    masks = [to_mask(c) for c in cycles]
    rows = g.rows
    for i, a in enumerate(masks):
        for b in masks[i + 1:]:
            cross = sum((rows[v] & b).bit_count() for v in iter_bits(a))
            if cross > 10:
                out.append(f"{cross} edges between cycles {sorted(iter_bits(a))} and {sorted(iter_bits(b))}")
    covered = 0
    for m in masks:
        covered |= m
    for v in range(g.n):
        for m in masks:
            if not m >> v & 1 and (rows[v] & m).bit_count() > 2:
                out.append(f"vertex {v} has {(rows[v] & m).bit_count()} edges to cycle {sorted(iter_bits(m))}")
    return out


def _cycles_valid(g: Graph, cycles: Sequence[Sequence[int]]) -> bool:
    seen = 0
    for c in cycles:
        m = to_mask(c)
        if len(c) != 5 or m.bit_count() != 5 or seen & m:
            return False
        seen |= m
        if any((g.rows[v] & m).bit_count() != 2 for v in c):
            return False
        if len(g.component_masks(m)) != 1:
            return False
    return True


def verify_record(rec: GameRecord, g: Optional[Graph] = None) -> dict[str, bool]:
    g = g if g is not None else Graph.from_text(rec.graph_text)
    n = rec.n
    return {
        "a_c5_count": rec.c5_count >= max(0, (n - 2) // 11) and _cycles_valid(g, rec.completed),
        "b_score_bound": rec.score <= score_bound(n),
        "c_cross_edges": not cross_edge_violations(g, rec.completed),
        "d_maximal": not g.has_triangle() and g.is_maximal_triangle_free(),
    }


@dataclass
class VerdictSummary:
    games: int
    failures: list[str]
    gaps: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures and not self.gaps


def verify_guarantees(records: Iterable[GameRecord]) -> VerdictSummary:
    failures, gaps = [], []
    count = 0
    for rec in records:
        count += 1
        tag = f"n={rec.n} {rec.convention} {rec.adversary} seed={rec.seed}"
        if rec.gap_error is not None:
            gaps.append(f"{tag}: {rec.gap_error}")
            continue
        verdicts = rec.verdicts or verify_record(rec)
        for clause, ok in verdicts.items():
            if not ok:
                failures.append(f"{tag}: clause {clause} failed")
    return VerdictSummary(count, failures, gaps)


@dataclass
class AuditReport:
    rows: int
    buckets: dict[str, dict]
    exceedances: list[str]
    over_eleven: list[str]

    @property
    def ok(self) -> bool:
        return not self.exceedances and not self.over_eleven

    def to_json(self) -> dict:
        return {"rows": self.rows, "buckets": self.buckets, "exceedances": self.exceedances,
                "over_eleven": self.over_eleven, "ok": self.ok}


def table1_audit(records: Iterable[GameRecord], threshold: int = 13) -> AuditReport:
    buckets: dict[str, dict] = {}
    exceed, over = [], []
    total = 0
    for rec in records:
        for row in rec.ledger:
            total += 1
            b = buckets.setdefault(row.scenario, {"count": 0, "max_reduction": None,
                                                  "bound": TABLE1_BOUNDS.get(row.scenario, 11)})
            b["count"] += 1
            if row.count_before > threshold:
                b["max_reduction"] = max(b["max_reduction"] or 0, row.reduction)
                tag = f"n={rec.n} {rec.convention} {rec.adversary} seed={rec.seed} cycle={list(row.cycle)}"
                if row.reduction > b["bound"]:
                    exceed.append(f"{tag}: {row.scenario} reduced count by {row.reduction} > {b['bound']}")
                if row.reduction > 11:
                    over.append(f"{tag}: reduction {row.reduction} from count {row.count_before}")
    return AuditReport(total, dict(sorted(buckets.items())), exceed, over)


# ---------------------------------------------------------------------------
# batches


def _run_cell(args) -> GameRecord:
    n, conv, kind, seed, strict, trace_dir = args
    return run_game(n, conv, kind, seed, strict=strict, trace_dir=trace_dir)


def simulate(cfg: BatchConfig) -> list[GameRecord]:
    jobs = [(n, conv, kind, seed, cfg.strict, cfg.trace_dir) for n, conv, kind, seed in cfg.cells()]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            records = list(pool.map(_run_cell, jobs, chunksize=8))
    else:
        records = [_run_cell(j) for j in jobs]
    records.sort(key=lambda r: (r.n, r.adversary, r.seed))
    if cfg.csv_path:
        with open(cfg.csv_path, "w", newline="") as fh:
            fh.write(summary_csv(records))
    if cfg.json_path:
        with open(cfg.json_path, "w") as fh:
            for r in records:
                fh.write(json.dumps(r.to_json(), separators=(",", ":")) + "\n")
    return records


def summary_csv(records: Iterable[GameRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue()


def load_records(path: str) -> list[GameRecord]:
    """Records from a JSON-lines summary or from a directory of trace files."""
    paths = [path]
    if os.path.isdir(path):
        paths = sorted(os.path.join(path, f) for f in os.listdir(path) if f.endswith(".jsonl"))
    out = []
    for p in paths:
        with open(p) as fh:
            for line in fh:
                if not line.strip():
                    continue
                d = json.loads(line)
                if "summary" in d:
                    d = d["summary"]
                elif "score" not in d:
                    continue
                out.append(GameRecord(
                    n=d["n"], convention=d["convention"], adversary=d["adversary"], seed=d["seed"],
                    score=d["score"], c5_count=d["c5_count"], completed=[tuple(c) for c in d["completed"]],
                    ledger=[ScenarioLog.from_json(r) for r in d["ledger"]], graph_text=d["graph"],
                    verdicts=d.get("verdicts", {}), gap_error=d.get("gap_error"), trace_path=d.get("trace_path")))
    return out
