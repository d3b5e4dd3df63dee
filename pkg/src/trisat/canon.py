"""Canonical keys for small graphs.

The key is the smallest upper-triangular adjacency bit string over the
labelings reached by an individualization-refinement search.  Refinement uses
neighbour counts into the current colour cells, so the search tree (and hence
the minimum) does not depend on the input labeling.  Vertices in a cell that
are twins of one another are interchangeable, so only one of them is branched
on; this keeps empty, complete-bipartite and matching-like boards cheap.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .graph import Graph, iter_bits

CANONICAL_EXACT_LIMIT = 10


@dataclass(frozen=True)
class CanonicalKey:
    data: bytes
    exact: bool = True


def _refine(rows: tuple[int, ...], cells: list[list[int]]) -> list[list[int]]:
    while True:
        masks = []
        for cell in cells:
            m = 0
            for v in cell:
                m |= 1 << v
            masks.append(m)
        new: list[list[int]] = []
        split = False
        for cell in cells:
            if len(cell) == 1:
                new.append(cell)
                continue
            groups: dict[tuple[int, ...], list[int]] = {}
            for v in cell:
                sig = tuple((rows[v] & m).bit_count() for m in masks)
                groups.setdefault(sig, []).append(v)
            if len(groups) > 1:
                split = True
                for sig in sorted(groups):
                    new.append(groups[sig])
            else:
                new.append(cell)
        cells = new
        if not split:
            return cells


def _twin_representatives(rows: tuple[int, ...], cell: list[int]) -> list[int]:
    reps: list[int] = []
    for v in cell:
        for r in reps:
            if rows[v] & ~(1 << r) == rows[r] & ~(1 << v):
                break
        else:
            reps.append(v)
    return reps


def _encode(rows: tuple[int, ...], order: list[int]) -> int:
    code = 0
    n = len(order)
    for i in range(n):
        row = rows[order[i]]
        for j in range(i + 1, n):
            code = (code << 1) | (row >> order[j] & 1)
    return code


def _best_order(g: Graph) -> tuple[int, list[int]]:
    rows = g.rows
    by_degree: dict[int, list[int]] = {}
    for v in range(g.n):
        by_degree.setdefault(rows[v].bit_count(), []).append(v)
    start = [by_degree[d] for d in sorted(by_degree)]

    best_code = -1
    best_order: list[int] = []
    stack = [start]
    while stack:
        cells = _refine(rows, stack.pop())
        target = next((i for i, c in enumerate(cells) if len(c) > 1), None)
        if target is None:
            order = [c[0] for c in cells]
            code = _encode(rows, order)
            if best_code < 0 or code < best_code:
                best_code, best_order = code, order
            continue
        cell = cells[target]
        for v in reversed(_twin_representatives(rows, cell)):
            rest = [w for w in cell if w != v]
            stack.append(cells[:target] + [[v], rest] + cells[target + 1:])
    return best_code, best_order


def _pack(n: int, code: int) -> bytes:
    nbits = n * (n - 1) // 2
    return n.to_bytes(2, "big") + code.to_bytes((nbits + 7) // 8 or 1, "big")


def _heuristic_key(g: Graph) -> CanonicalKey:
    rows = g.rows
    labels = [rows[v].bit_count() for v in range(g.n)]
    for _ in range(4):
        labels = [hash((labels[v], tuple(sorted(labels[w] for w in iter_bits(rows[v]))))) for v in range(g.n)]
    digest = hashlib.blake2b(repr((g.n, g.m, sorted(labels))).encode(), digest_size=16).digest()
    return CanonicalKey(digest, exact=False)


def canonical_form(g: Graph, exact_limit: int = CANONICAL_EXACT_LIMIT) -> CanonicalKey:
    """Isomorphism-invariant key; keys above ``exact_limit`` are marked inexact."""
    if g.n > exact_limit:
        return _heuristic_key(g)
    if g.n == 0:
        return CanonicalKey(_pack(0, 0))
    code, _ = _best_order(g)
    return CanonicalKey(_pack(g.n, code))


def canonical_graph(g: Graph) -> tuple[CanonicalKey, Graph]:
    """Key together with the relabeled representative it encodes."""
    if g.n > CANONICAL_EXACT_LIMIT:
        raise ValueError(f"exact canonical relabeling limited to n <= {CANONICAL_EXACT_LIMIT}")
    if g.n == 0:
        return CanonicalKey(_pack(0, 0)), g
    code, order = _best_order(g)
    perm = [0] * g.n
    for pos, v in enumerate(order):
        perm[v] = pos
    return CanonicalKey(_pack(g.n, code)), g.relabel(perm)
