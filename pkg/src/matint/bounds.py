"""Dynamic-programming upper bounds on the interdiction gain.

``f(i, r, s)`` bounds how much the minimum basis weight can still grow when
elements ``i..m-1`` are interdicted with remaining budget ``r``, given that
the decisions on ``0..i-1`` are summarised by state ``s``:

    f(m, r, s) = 0
    f(i, r, s) = f(i+1, r, s)                                   if c_i > r
               = max(f(i+1, r, s), f(i+1, r-c_i, pi(i,s)) + delta(i, r, s))

A table entry satisfies, for every X reachable with that state,

    f(i, r, s) >= max{ F(X) - F(X_<i) : c(X_<i) <= C - r, c(X_>=i) <= r }.

Prefix strengthening adds the exact interdiction pattern of the first ``p``
elements to the state.  Values saturate at ``INF``.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from numba import njit

from . import graph
from .matroid import DirectSum, Graphic, Instance, MatroidSpec, Partition, Uniform

INF = np.int64(2**60)
MAGIC = b"MIBT1"


class MemoryBudgetExceeded(Exception):
    pass


# ---------------------------------------------------------------------------
# Graphic delta (one row per element and prefix pattern)


@njit(cache=True, nogil=True)
def _first_replacements(n, eu, ev, w):
    """w_f - w_i where f is the first j > i joining the ends of i within {i+1..j}."""
    m = len(eu)
    out = np.full(m, INF, dtype=np.int64)
    parent = np.empty(n, dtype=np.int64)
    for i in range(m):
        if eu[i] == ev[i]:
            out[i] = 0
            continue
        for v in range(n):
            parent[v] = v
        for j in range(i + 1, m):
            a = eu[j]
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            b = ev[j]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a != b:
                parent[a] = b
            x = eu[i]
            while parent[x] != x:
                x = parent[x]
            y = ev[i]
            while parent[y] != y:
                y = parent[y]
            if x == y:
                out[i] = w[j] - w[i]
                break
    return out


@njit(cache=True, nogil=True)
def _graphic_row(i, mask, p, Cp, Cr, eu, ev, w, cost, cuttable, init,
                 start, arcs, to, res, pred, queue, out):
    """Fill out[0..Cr] with delta(i, r) for prefix pattern ``mask``.

    ``Cp`` is the budget left after paying for the pattern.  Prefix elements
    inside the pattern are deleted, prefix elements outside it cannot be cut.
    """
    m = len(eu)
    if eu[i] == ev[i]:
        for r in range(Cr + 1):
            out[r] = 0
        return
    if Cp < 0:
        for r in range(Cr + 1):
            out[r] = 0
        return
    for r in range(Cr + 1):
        out[r] = init
    big = Cr + 1
    for a in range(2 * m):
        res[a] = 0
    for j in range(i):
        if j < p:
            if (mask >> j) & 1:
                continue
            cap = big
        elif cuttable[j]:
            cap = cost[j]
        else:
            cap = big
        res[2 * j] = cap
        res[2 * j + 1] = cap
    s = eu[i]
    t = ev[i]
    x = graph.augment(start, arcs, to, res, s, t, 0, Cp, pred, queue)
    lo = Cp - x + 1
    if lo < 0:
        lo = 0
    for r in range(lo, Cr + 1):
        out[r] = 0
    if x > Cp:
        return
    for j in range(i + 1, m):
        res[2 * j] += big
        res[2 * j + 1] += big
        x = graph.augment(start, arcs, to, res, s, t, x, Cp, pred, queue)
        nlo = Cp - x + 1
        if nlo < 0:
            nlo = 0
        gain = w[j] - w[i]
        for r in range(nlo, lo):
            if gain < out[r]:
                out[r] = gain
        if nlo < lo:
            lo = nlo
        if x > Cp:
            break


class _GraphicRows:
    """Per-part graphic delta rows (replacement-cut evaluator) on rounded costs."""

    def __init__(self, g: Graphic, w: np.ndarray, cost: np.ndarray, cuttable: np.ndarray, Cr: int):
        self.m = g.size
        self.eu = np.array([u for u, _ in g.edges], dtype=np.int64)
        self.ev = np.array([v for _, v in g.edges], dtype=np.int64)
        self.w = w
        self.cost = cost
        self.cuttable = cuttable
        self.Cr = Cr
        self.start, self.arcs, self.to = graph.build_csr(g.n, self.eu, self.ev)
        self.init = _first_replacements(g.n, self.eu, self.ev, w)
        self.res = np.zeros(2 * self.m, dtype=np.int64)
        self.pred = np.empty(g.n, dtype=np.int64)
        self.queue = np.empty(g.n, dtype=np.int64)

    def row(self, i: int, mask: int, p: int, Cp: int, out: np.ndarray) -> None:
        _graphic_row(i, mask, p, Cp, self.Cr, self.eu, self.ev, self.w, self.cost,
                     self.cuttable, self.init[i], self.start, self.arcs, self.to,
                     self.res, self.pred, self.queue, out)


# ---------------------------------------------------------------------------
# State spaces


@dataclass
class _Part:
    lo: int
    hi: int
    so: int  # first global state id
    n_states: int
    kind: str  # "uniform" or "graphic"
    k: int = 0
    rows: _GraphicRows | None = None
    spec: MatroidSpec | None = None


class StateSpace:
    """Direct sum (left fold) of per-part spaces: uniform counters or graphic.

    A global state belongs to exactly one part; elements of part k read a
    state from another part as that part's empty state.
    """

    def __init__(self, parts: list[_Part], w: np.ndarray, m: int):
        self.parts = parts
        self.w = w
        self.m = m
        self.n_states = sum(p.n_states for p in parts) if parts else 1
        self.phi0 = 0
        self.part_of = np.zeros(m, dtype=np.int64)
        for k, part in enumerate(parts):
            self.part_of[part.lo:part.hi] = k
        self.pi = np.zeros((m, self.n_states), dtype=np.int64)
        for i in range(m):
            part = parts[self.part_of[i]]
            for s in range(self.n_states):
                ls = self._local(part, s)
                if part.kind == "uniform":
                    self.pi[i, s] = part.so + min(ls + 1, part.n_states - 1)
                else:
                    self.pi[i, s] = part.so
        self.has_graphic = any(p.kind == "graphic" for p in parts)

    @staticmethod
    def _local(part: _Part, s: int) -> int:
        return s - part.so if part.so <= s < part.so + part.n_states else 0

    def phi(self, X: Sequence[int]) -> int:
        s = self.phi0
        for e in sorted(X):
            s = int(self.pi[e, s])
        return s

    def _uniform_delta(self, part: _Part, i: int, n: int) -> int:
        li = i - part.lo
        mp = part.hi - part.lo
        kn = part.k + n
        if kn <= li:
            return 0
        if kn < mp:
            return int(self.w[part.lo + kn] - self.w[i])
        return int(INF)

    def delta_rows(self, i: int, nmask: int, p: int, pattern_cost: np.ndarray,
                   Cp0: int, Cr: int) -> np.ndarray:
        """delta(i, r, s) for masks < nmask as an array [nmask, S, Cr+1]."""
        part = self.parts[self.part_of[i]]
        S = self.n_states
        out = np.empty((nmask, S, Cr + 1), dtype=np.int64)
        if part.kind == "uniform":
            vals = np.array([self._uniform_delta(part, i, self._local(part, s)) for s in range(S)],
                            dtype=np.int64)
            out[:] = vals[None, :, None]
            return out
        row = np.empty(Cr + 1, dtype=np.int64)
        li = i - part.lo
        lp = max(0, min(p, part.hi) - part.lo)  # pattern bits inside this part
        for mask in range(nmask):
            lmask = (mask >> part.lo) & ((1 << lp) - 1) if lp else 0
            part.rows.row(li, lmask, lp, Cp0 - int(pattern_cost[mask]), row)
            out[mask, :, :] = row[None, :]
        return out

    def delta(self, i: int, r: int, s: int, mask: int = 0, p: int = 0,
              cost: Sequence[int] | None = None, C: int | None = None) -> int:
        """Single delta value; ``cost``/``C`` are the (rounded) bound data."""
        part = self.parts[self.part_of[i]]
        if part.kind == "uniform":
            return self._uniform_delta(part, i, self._local(part, s))
        pc = sum(cost[j] for j in range(p) if (mask >> j) & 1) if p else 0
        row = np.empty(part.rows.Cr + 1, dtype=np.int64)
        lp = max(0, min(p, part.hi) - part.lo)
        lmask = (mask >> part.lo) & ((1 << lp) - 1) if lp else 0
        part.rows.row(i - part.lo, lmask, lp, (C if C is not None else part.rows.Cr) - pc, row)
        return int(row[r])


def _bound_costs(inst: Instance, K: int) -> tuple[np.ndarray, int]:
    c = np.asarray(inst.c, dtype=np.int64) // K
    return c, -(-inst.C // K)


def statespace(inst: Instance, K: int = 1, allowed: np.ndarray | None = None) -> StateSpace:
    """State space for a normalized instance; graphic parts use replacement-cut delta rows."""
    m = inst.m
    w = np.asarray(inst.w, dtype=np.int64)
    cost, Cr = _bound_costs(inst, K)
    if allowed is None:
        allowed = np.asarray(inst.c, dtype=np.int64) <= inst.C
    parts: list[_Part] = []

    def walk(s: MatroidSpec, lo: int) -> None:
        if isinstance(s, DirectSum):
            for sub in s.parts:
                walk(sub, lo)
                lo += sub.size
            return
        so = sum(p.n_states for p in parts)
        if isinstance(s, Uniform):
            parts.append(_Part(lo, lo + s.m, so, s.m + 1, "uniform", k=s.k, spec=s))
        elif isinstance(s, Partition):
            for els, cap in s.blocks:
                a, b = lo + min(els, default=0), lo + max(els, default=-1) + 1
                if sorted(els) != list(range(a - lo, b - lo)):
                    raise ValueError("partition blocks must be contiguous after normalization")
                parts.append(_Part(a, b, sum(p.n_states for p in parts), b - a + 1,
                                   "uniform", k=cap, spec=s))
        elif isinstance(s, Graphic):
            hi = lo + s.size
            rows = _GraphicRows(s, w[lo:hi], cost[lo:hi], allowed[lo:hi].copy(), Cr)
            parts.append(_Part(lo, hi, so, 1, "graphic", rows=rows, spec=s))
        else:
            raise TypeError(f"unknown matroid spec {s!r}")

    walk(inst.matroid, 0)
    parts = [p for p in parts if p.hi > p.lo] or parts
    # renumber states after dropping empty parts
    so = 0
    for p in parts:
        p.so = so
        so += p.n_states
    return StateSpace(parts, w, m)


def statespace_uniform(k: int, m: int, w: Sequence[int]) -> StateSpace:
    inst = Instance(Uniform(m, k), tuple(w), (1,) * m, 0)
    return statespace(inst)


def statespace_direct_sum(*spaces: StateSpace) -> StateSpace:
    """Concatenate state spaces over consecutive element ranges."""
    parts: list[_Part] = []
    lo = 0
    so = 0
    ws = []
    for sp in spaces:
        for p in sp.parts:
            parts.append(_Part(p.lo + lo, p.hi + lo, so, p.n_states, p.kind, p.k, p.rows, p.spec))
            so += p.n_states
        ws.append(sp.w)
        lo += sp.m
    return StateSpace(parts, np.concatenate(ws) if ws else np.zeros(0, np.int64), lo)


def delta_graphic(inst: Instance, K: int = 1, mask: int = 0, p: int = 0) -> np.ndarray:
    """Array [m, Cr+1] of graphic delta values for a normalized graphic instance."""
    if not isinstance(inst.matroid, Graphic):
        raise TypeError("delta_graphic needs a graphic matroid")
    sp = statespace(inst, K)
    cost, Cr = _bound_costs(inst, K)
    pc = np.array([sum(int(cost[j]) for j in range(p) if (mk >> j) & 1) for mk in range(1 << p)],
                  dtype=np.int64)
    out = np.empty((inst.m, Cr + 1), dtype=np.int64)
    for i in range(inst.m):
        rows = sp.delta_rows(i, 1 << p, p, pc, Cr, Cr)
        out[i] = rows[mask, 0]
    return out


# ---------------------------------------------------------------------------
# Table construction


@njit(cache=True, nogil=True)
def _dp_row(fn, fc, d, pi_i, ci, allowed_i, bit, nmask):
    S = fc.shape[1]
    R = fc.shape[2]
    for mask in range(nmask):
        nm = mask | bit
        for s in range(S):
            ns = pi_i[s]
            for r in range(R):
                a = fn[mask, s, r]
                if allowed_i and ci <= r:
                    b = fn[nm, ns, r - ci]
                    x = d[mask, s, r]
                    if b >= INF or x >= INF:
                        v = INF
                    else:
                        v = b + x
                        if v > INF:
                            v = INF
                    if v > a:
                        a = v
                fc[mask, s, r] = a


@dataclass(frozen=True)
class BoundTable:
    p: int
    K: int
    C: int  # rounded capacity the table spans
    values: np.ndarray  # [m+1, 2^p, S, C+1]
    phi0: int = 0

    @property
    def m(self) -> int:
        return self.values.shape[0] - 1

    def query(self, i: int, r: int, s: int, mask: int = 0) -> float:
        v = int(self.values[i, mask & ((1 << self.p) - 1), s, min(r, self.C)])
        return math.inf if v >= INF else v

    def rounded(self, remaining: int) -> int:
        return min(self.C, remaining // self.K)


def table_bytes(inst: Instance, n_states: int, p: int, K: int = 1) -> int:
    Cr = -(-inst.C // K)
    return (inst.m + 1) * (1 << p) * n_states * (Cr + 1) * 8


def build_levels(inst: Instance, space: StateSpace, p: int, K: int = 1,
                 allowed: np.ndarray | None = None,
                 mem_limit: int | None = None) -> Iterator[BoundTable | None]:
    """Build f_p bottom-up; yields None after every element row, then the table.

    Yielding lets a scheduler interleave construction with search; drop the
    generator to abandon the level.
    """
    m = inst.m
    S = space.n_states
    need = table_bytes(inst, S, p, K)
    if mem_limit is not None and need > mem_limit:
        raise MemoryBudgetExceeded(f"table needs {need} bytes, budget is {mem_limit}")
    cost, Cr = _bound_costs(inst, K)
    if allowed is None:
        allowed = np.asarray(inst.c, dtype=np.int64) <= inst.C
    P = 1 << p
    pattern_cost = np.zeros(P, dtype=np.int64)
    for mask in range(1, P):
        low = (mask & -mask).bit_length() - 1
        pattern_cost[mask] = pattern_cost[mask & (mask - 1)] + cost[low]
    f = np.zeros((m + 1, P, S, Cr + 1), dtype=np.int64)
    for i in range(m - 1, -1, -1):
        nmask = 1 << min(i, p)
        if allowed[i]:
            d = space.delta_rows(i, nmask, p, pattern_cost, Cr, Cr)
        else:
            d = np.zeros((nmask, S, Cr + 1), dtype=np.int64)
        bit = (1 << i) if i < p else 0
        _dp_row(f[i + 1], f[i], d, space.pi[i], int(cost[i]), bool(allowed[i]), bit, nmask)
        yield None
    yield BoundTable(p, K, Cr, f, space.phi0)


def build_table(inst: Instance, space: StateSpace, p: int = 0, K: int = 1,
                allowed: np.ndarray | None = None, mem_limit: int | None = None) -> BoundTable:
    table = None
    for table in build_levels(inst, space, p, K, allowed, mem_limit):
        pass
    return table


def max_useful_prefix(inst: Instance, space: StateSpace, allowed: np.ndarray) -> int:
    """Prefix bits only sharpen graphic rows; counter states are already exact."""
    if not isinstance(inst.matroid, Graphic):
        return 0
    idx = np.flatnonzero(allowed)
    return int(idx[-1]) + 1 if len(idx) else 0


def round_costs(inst: Instance, K: int) -> Instance:
    """Relaxed data used only for bounds: floor costs, ceil capacity."""
    if K < 1:
        raise ValueError("K must be positive")
    cost, Cr = _bound_costs(inst, K)
    return Instance(inst.matroid, inst.w, tuple(int(x) for x in cost), Cr, perm=inst.perm,
                    target=inst.target, dual=inst.dual, deleted=inst.deleted,
                    full_rank=inst.full_rank, source=inst.source, inf_cost=inst.inf_cost)


def root_bound(inst: Instance, table: BoundTable, F0: int) -> float:
    """F(empty) plus the table's root entry: an upper bound on the optimum."""
    v = table.query(0, table.C, table.phi0, 0)
    return math.inf if math.isinf(v) else F0 + v


# ---------------------------------------------------------------------------
# Binary cache


def dump(table: BoundTable, path, m: int, C: int) -> None:
    vals = np.where(table.values >= INF, np.iinfo(np.int64).max, table.values).astype("<i8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<5q", m, C, table.K, table.p, table.values.shape[2]))
        fh.write(vals.tobytes(order="C"))


def load(path) -> BoundTable:
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise ValueError("not a bound table file")
        m, C, K, p, S = struct.unpack("<5q", fh.read(40))
        Cr = -(-C // K)
        raw = np.frombuffer(fh.read(), dtype="<i8").astype(np.int64)
    vals = raw.reshape(m + 1, 1 << p, S, Cr + 1)
    vals = np.where(vals == np.iinfo(np.int64).max, INF, vals)
    return BoundTable(p, K, Cr, vals)
