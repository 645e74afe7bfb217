"""Multigraph cuts (max-flow based) and a union-find with rollback.

Capacities handed to the public functions are non-negative integers or
``math.inf``.  Internally an infinite capacity becomes a sentinel equal to the
sum of all finite capacities plus one, so no finite cut can reach it and int64
arithmetic never overflows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit


@dataclass(frozen=True)
class Multigraph:
    n: int
    edges: tuple[tuple[int, int], ...]

    @property
    def m(self) -> int:
        return len(self.edges)


# ---------------------------------------------------------------------------
# Flow kernels.  Edge e owns arcs 2e (u->v) and 2e+1 (v->u); both carry the
# edge capacity as residual, which models an undirected edge.  ``start``/``arcs``
# is a CSR adjacency over arcs leaving each vertex.


def build_csr(n: int, eu: np.ndarray, ev: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = len(eu)
    to = np.empty(2 * m, dtype=np.int64)
    to[0::2] = ev
    to[1::2] = eu
    tail = np.empty(2 * m, dtype=np.int64)
    tail[0::2] = eu
    tail[1::2] = ev
    order = np.argsort(tail, kind="stable")
    start = np.zeros(n + 1, dtype=np.int64)
    np.add.at(start, tail + 1, 1)
    start = np.cumsum(start)
    return start, order.astype(np.int64), to


@njit(cache=True, nogil=True)
def augment(start, arcs, to, res, s, t, flow, limit, pred, queue):
    """Push flow along shortest augmenting paths until none is left or flow > limit."""
    n = len(start) - 1
    while flow <= limit:
        for v in range(n):
            pred[v] = -2
        pred[s] = -1
        qh = 0
        qt = 1
        queue[0] = s
        while qh < qt and pred[t] == -2:
            v = queue[qh]
            qh += 1
            for k in range(start[v], start[v + 1]):
                a = arcs[k]
                x = to[a]
                if res[a] > 0 and pred[x] == -2:
                    pred[x] = a
                    queue[qt] = x
                    qt += 1
        if pred[t] == -2:
            break
        push = limit + 1 - flow
        x = t
        while x != s:
            a = pred[x]
            if res[a] < push:
                push = res[a]
            x = to[a ^ 1]
        x = t
        while x != s:
            a = pred[x]
            res[a] -= push
            res[a ^ 1] += push
            x = to[a ^ 1]
        flow += push
    return flow


@njit(cache=True, nogil=True)
def source_side(start, arcs, to, res, s, mark, queue):
    n = len(start) - 1
    for v in range(n):
        mark[v] = False
    mark[s] = True
    qh = 0
    qt = 1
    queue[0] = s
    while qh < qt:
        v = queue[qh]
        qh += 1
        for k in range(start[v], start[v + 1]):
            a = arcs[k]
            x = to[a]
            if res[a] > 0 and not mark[x]:
                mark[x] = True
                queue[qt] = x
                qt += 1


def _caps(cap: Sequence[float]) -> tuple[np.ndarray, int]:
    finite = [int(x) for x in cap if not math.isinf(x)]
    if any(x < 0 for x in finite):
        raise ValueError("capacities must be non-negative")
    sentinel = sum(finite) + 1
    arr = np.array([sentinel if math.isinf(x) else int(x) for x in cap], dtype=np.int64)
    return arr, sentinel


def _st_cut(n, start, arcs, to, capv, sentinel, s, t):
    res = np.repeat(capv, 2)
    pred = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    flow = augment(start, arcs, to, res, s, t, 0, sentinel, pred, queue)
    mark = np.empty(n, dtype=np.bool_)
    source_side(start, arcs, to, res, s, mark, queue)
    side = frozenset(int(v) for v in np.flatnonzero(mark))
    return (math.inf if flow >= sentinel else int(flow)), side


def min_st_cut(g: Multigraph, cap: Sequence[float], s: int, t: int) -> tuple[float, frozenset[int]]:
    """Minimum s-t cut value and the source side of one minimum cut."""
    if s == t:
        raise ValueError("s and t must differ")
    if len(cap) != g.m:
        raise ValueError("one capacity per edge required")
    capv, sentinel = _caps(cap)
    eu = np.array([u for u, _ in g.edges], dtype=np.int64)
    ev = np.array([v for _, v in g.edges], dtype=np.int64)
    start, arcs, to = build_csr(g.n, eu, ev)
    return _st_cut(g.n, start, arcs, to, capv, sentinel, s, t)


def global_min_cut(g: Multigraph, cap: Sequence[float]) -> tuple[float, frozenset[int]]:
    """Cheapest nonempty proper vertex subset boundary, via n-1 s-t flows from vertex 0."""
    if g.n < 2:
        raise ValueError("global min cut needs at least two vertices")
    capv, sentinel = _caps(cap)
    eu = np.array([u for u, _ in g.edges], dtype=np.int64)
    ev = np.array([v for _, v in g.edges], dtype=np.int64)
    start, arcs, to = build_csr(g.n, eu, ev)
    best: tuple[float, frozenset[int]] | None = None
    for t in range(1, g.n):
        cand = _st_cut(g.n, start, arcs, to, capv, sentinel, 0, t)
        if best is None or cand[0] < best[0]:
            best = cand
            if cand[0] == 0:
                break
    return best


# ---------------------------------------------------------------------------
# Union-find with rollback: union by size, no path compression, so each union
# is undone in O(1) by detaching the root it attached.


class UnionFindUndo:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.log: list[int] = []  # attached root, or -1 for a no-op union

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            self.log.append(-1)
            return False
        if self.size[ra] > self.size[rb]:
            ra, rb = rb, ra
        self.parent[ra] = rb
        self.size[rb] += self.size[ra]
        self.log.append(ra)
        return True

    def undo(self) -> None:
        if not self.log:
            raise RuntimeError("undo on an empty union log")
        ra = self.log.pop()
        if ra >= 0:
            rb = self.parent[ra]
            self.size[rb] -= self.size[ra]
            self.parent[ra] = ra

    def snapshot(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return tuple(self.parent), tuple(self.size)
