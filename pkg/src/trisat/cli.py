"""Command-line entry point: simulate, solve, oracle, audit, replay, play."""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence, TextIO

from .adversaries import SUITE, AdversaryKind
from .builder import BuilderMemory, StrategyGapError, builder_move, on_opponent_move
from .game import GameConfig, GameStateError, Role, TraceError, new_game, replay_trace
from .graph import Edge, GraphError, IllegalMoveError
from .harness import (CONVENTIONS, BatchConfig, load_records, simulate, summary_csv, table1_audit,
                      verify_guarantees)
from .oracles import CLAIMS, density_bound, frs_lower_bound, trivial_bounds
from .solver import SolverLimitError, solve_hajnal_winner, solve_saturation_score


def _emit(obj, out: TextIO) -> None:
    out.write(json.dumps(obj, indent=None, separators=(", ", ": ")) + "\n")


def _adversaries(names: Sequence[str]) -> tuple[AdversaryKind, ...]:
    if not names or names == ["all"]:
        return SUITE
    return tuple(AdversaryKind(x) for x in names)


def cmd_simulate(args, out: TextIO) -> int:
    cfg = BatchConfig(ns=tuple(args.n), adversaries=_adversaries(args.adversary), games_per_cell=args.games,
                      master_seed=args.seed, conventions=tuple(args.convention), trace_dir=args.trace_dir,
                      csv_path=args.csv, json_path=args.json, workers=args.workers, strict=args.strict)
    records = simulate(cfg)
    if not args.csv:
        out.write(summary_csv(records))
    gap_dir = args.trace_dir or "."
    for r in records:
        if r.gap_error is not None and r.trace and not r.trace_path:
            os.makedirs(gap_dir, exist_ok=True)
            path = os.path.join(gap_dir, f"gap_n{r.n}_{r.adversary}_{r.seed}.jsonl")
            with open(path, "w") as fh:
                fh.write("\n".join(r.trace) + "\n")
            print(f"strategy gap: {r.gap_error}; trace written to {path}", file=sys.stderr)
    verdict = verify_guarantees(records)
    audit = table1_audit(records)
    for line in verdict.failures + verdict.gaps + audit.exceedances + audit.over_eleven:
        print(line, file=sys.stderr)
    print(f"games={verdict.games} failures={len(verdict.failures)} gaps={len(verdict.gaps)} "
          f"audit_ok={audit.ok}", file=sys.stderr)
    return 0 if verdict.ok and audit.ok else 1


def cmd_solve(args, out: TextIO) -> int:
    try:
        if args.game == "hajnal":
            res = solve_hajnal_winner(args.n, long_running=args.long)
        else:
            res = solve_saturation_score(args.n, CONVENTIONS[args.convention])
    except (SolverLimitError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(res.to_json(), out)
    return 0


def cmd_oracle(args, out: TextIO) -> int:
    try:
        if args.claim in CLAIMS:
            fn = CLAIMS[args.claim]
            rep = fn(full=True) if args.full and args.claim != "vertex-c5-max" else fn()
            _emit(rep.to_json(), out)
        elif args.claim == "density":
            d = density_bound(args.k)
            _emit({"claim": "density", "k": args.k, "value": f"{d.numerator}/{d.denominator}"}, out)
        elif args.claim == "bounds":
            lo, hi = trivial_bounds(args.n)
            _emit({"claim": "bounds", "n": args.n, "lower": lo, "upper": hi}, out)
        elif args.claim == "frs":
            _emit({"claim": "frs", "n": args.n, "value": frs_lower_bound(args.n), "log": "natural"}, out)
    except GraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def cmd_audit(args, out: TextIO) -> int:
    try:
        records = load_records(args.path)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot read records from {args.path}: {exc}", file=sys.stderr)
        return 2
    rep = table1_audit(records)
    _emit(rep.to_json(), out)
    return 0 if rep.ok else 1


def _split_trace(lines: list[str]) -> tuple[list[str], Optional[dict]]:
    moves, summary = [], None
    for line in lines:
        if line.startswith('{"summary"'):
            summary = json.loads(line)["summary"]
        elif line.strip():
            moves.append(line)
    return moves, summary


def cmd_replay(args, out: TextIO) -> int:
    try:
        with open(args.trace) as fh:
            lines, summary = _split_trace(fh.read().splitlines())
        rep = replay_trace(lines)
    except (OSError, TraceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    g = rep.state.graph
    result = {"n": g.n, "score": g.m, "terminal": g.is_maximal_triangle_free(), "graph": g.to_text(),
              "round_trip": rep.to_lines() == lines}
    ok = result["round_trip"]
    if summary is not None:
        result["recorded_score"] = summary["score"]
        ok = ok and summary["score"] == g.m and summary["graph"] == g.to_text()
    result["ok"] = ok
    _emit(result, out)
    return 0 if ok else 1


def _board(g) -> str:
    return "\n".join(f"  {v}: {' '.join(map(str, g.neighbors(v)))}" for v in range(g.n))


def cmd_play(args, out: TextIO, inp: TextIO) -> int:
    first = Role.MINIMIZER if args.first == "builder" else Role.MAXIMIZER
    state = new_game(GameConfig(args.n, first))
    mem = BuilderMemory.initial(args.n)
    out.write(f"n={args.n}; you are the maximizer; enter edges as 'u v', 'q' to quit\n")
    while not state.is_terminal():
        if state.to_move is Role.MINIMIZER:
            try:
                e, mem = builder_move(state, mem)
            except StrategyGapError as exc:
                out.write(f"builder has no robust move: {exc}\n")
                return 1
            state = state.apply(e)
            out.write(f"builder plays {e.u} {e.v}  (phase {mem.phase.value}, cycles {len(mem.completed)})\n")
        else:
            out.write("> ")
            out.flush()
            line = inp.readline()
            if not line or line.strip() in ("q", "quit"):
                out.write("bye\n")
                return 0
            try:
                a, b = (int(x) for x in line.split())
                state = state.apply((a, b))
            except (ValueError, IllegalMoveError, GraphError, GameStateError) as exc:
                out.write(f"rejected: {exc}\n")
                continue
            mem = on_opponent_move(mem, Edge.of(a, b), state.graph)
        out.write(_board(state.graph) + "\n")
    out.write(f"game over: score {state.graph.m}, builder cycles {len(mem.completed)}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trisat", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="batch games of the builder against adversaries")
    s.add_argument("--n", type=int, nargs="+", required=True)
    s.add_argument("--adversary", nargs="+", default=["all"],
                   choices=["all"] + [k.value for k in AdversaryKind])
    s.add_argument("--games", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--convention", nargs="+", default=["sat_g"], choices=list(CONVENTIONS))
    s.add_argument("--csv")
    s.add_argument("--json")
    s.add_argument("--trace-dir")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--strict", action="store_true", help="distance-3 witnesses must be far from both ends")

    s = sub.add_parser("solve", help="exact game values on small boards")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--game", choices=["saturation", "hajnal"], default="saturation")
    s.add_argument("--convention", choices=list(CONVENTIONS), default="sat_g")
    s.add_argument("--long", action="store_true", help="allow long Hajnal runs up to n=10")

    s = sub.add_parser("oracle", help="exhaustive extremal checks and bound formulas")
    s.add_argument("--claim", required=True, choices=list(CLAIMS) + ["density", "bounds", "frs"])
    s.add_argument("--full", action="store_true", help="unpruned 2^25 enumeration")
    s.add_argument("--k", type=int, default=11)
    s.add_argument("--n", type=int, default=16)

    s = sub.add_parser("audit", help="scenario audit of stored records or traces")
    s.add_argument("path")

    s = sub.add_parser("replay", help="replay and verify a trace file")
    s.add_argument("trace")

    s = sub.add_parser("play", help="play the maximizer against the builder")
    s.add_argument("--n", type=int, default=13)
    s.add_argument("--first", choices=["builder", "human"], default="builder")
    return p


def main(argv: Optional[Sequence[str]] = None, out: TextIO = sys.stdout, inp: TextIO = sys.stdin) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "simulate":
            return cmd_simulate(args, out)
        if args.command == "solve":
            return cmd_solve(args, out)
        if args.command == "oracle":
            return cmd_oracle(args, out)
        if args.command == "audit":
            return cmd_audit(args, out)
        if args.command == "replay":
            return cmd_replay(args, out)
        return cmd_play(args, out, inp)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
