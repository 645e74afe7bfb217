"""Matroid descriptions, independence/rank oracles and basis machinery.

Elements are 0-based integers ``0..m-1`` throughout the library; the file
format and the CLI translate to 1-based indices at the edges.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence, Union

import numpy as np


class Unsupported(Exception):
    """Raised when an operation is not available for a matroid variant."""


@dataclass(frozen=True)
class Uniform:
    m: int
    k: int

    @property
    def size(self) -> int:
        return self.m


@dataclass(frozen=True)
class Partition:
    # each block is (elements, cap)
    blocks: tuple[tuple[tuple[int, ...], int], ...]

    @property
    def size(self) -> int:
        return sum(len(b) for b, _ in self.blocks)


@dataclass(frozen=True)
class Graphic:
    n: int
    edges: tuple[tuple[int, int], ...]

    @property
    def size(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class DirectSum:
    """Parts occupy consecutive element ranges in order."""

    parts: tuple["MatroidSpec", ...]

    @property
    def size(self) -> int:
        return sum(p.size for p in self.parts)


MatroidSpec = Union[Uniform, Partition, Graphic, DirectSum]


def partition(blocks: Iterable[tuple[Iterable[int], int]]) -> Partition:
    return Partition(tuple((tuple(els), int(cap)) for els, cap in blocks))


def graphic(n: int, edges: Iterable[tuple[int, int]]) -> Graphic:
    return Graphic(n, tuple((int(u), int(v)) for u, v in edges))


def check_spec(spec: MatroidSpec) -> None:
    """Validate structural invariants; raises ValueError."""
    if isinstance(spec, Uniform):
        if spec.m < 0 or not 0 <= spec.k:
            raise ValueError(f"bad uniform matroid {spec}")
    elif isinstance(spec, Partition):
        seen: set[int] = set()
        for els, cap in spec.blocks:
            if not 0 <= cap <= len(els):
                raise ValueError(f"block cap {cap} outside [0, {len(els)}]")
            if seen.intersection(els) or len(set(els)) != len(els):
                raise ValueError("partition blocks overlap")
            seen.update(els)
        if seen != set(range(spec.size)):
            raise ValueError("partition blocks must cover 0..m-1")
    elif isinstance(spec, Graphic):
        for u, v in spec.edges:
            if not (0 <= u < spec.n and 0 <= v < spec.n):
                raise ValueError(f"edge ({u},{v}) outside vertex range")
    elif isinstance(spec, DirectSum):
        for part in spec.parts:
            check_spec(part)
    else:
        raise TypeError(f"unknown matroid spec {spec!r}")


# ---------------------------------------------------------------------------
# Flat representation: every element is either a graph edge (with endpoints in
# a global vertex namespace) or a member of a capped block.  Direct sums of the
# supported variants flatten losslessly, and the search kernels run on it.


@dataclass(frozen=True)
class Flat:
    n_vertices: int
    eu: np.ndarray  # endpoint, -1 for block elements
    ev: np.ndarray
    eblk: np.ndarray  # block id, -1 for graph edges
    bcap: np.ndarray

    @property
    def m(self) -> int:
        return len(self.eu)


def flatten(spec: MatroidSpec) -> Flat:
    eu: list[int] = []
    ev: list[int] = []
    eblk: list[int] = []
    bcap: list[int] = []
    nv = 0

    def walk(s: MatroidSpec, base: int) -> None:
        nonlocal nv
        if isinstance(s, Uniform):
            b = len(bcap)
            bcap.append(s.k)
            for _ in range(s.m):
                eu.append(-1)
                ev.append(-1)
                eblk.append(b)
        elif isinstance(s, Partition):
            owner = [0] * s.size
            for bi, (els, cap) in enumerate(s.blocks):
                for e in els:
                    owner[e] = len(bcap) + bi
            bcap.extend(cap for _, cap in s.blocks)
            for e in range(s.size):
                eu.append(-1)
                ev.append(-1)
                eblk.append(owner[e])
        elif isinstance(s, Graphic):
            for u, v in s.edges:
                eu.append(nv + u)
                ev.append(nv + v)
                eblk.append(-1)
            nv += s.n
        elif isinstance(s, DirectSum):
            for part in s.parts:
                walk(part, len(eu))
        else:
            raise TypeError(f"unknown matroid spec {s!r}")

    walk(spec, 0)
    as_arr = lambda xs: np.asarray(xs, dtype=np.int64)  # noqa: E731
    return Flat(nv, as_arr(eu), as_arr(ev), as_arr(eblk), as_arr(bcap))


class _Greedy:
    """Incremental independence checker over a Flat matroid."""

    __slots__ = ("parent", "count", "flat")

    def __init__(self, flat: Flat):
        self.flat = flat
        self.parent = list(range(flat.n_vertices))
        self.count = [0] * len(flat.bcap)

    def _find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def can_add(self, e: int) -> bool:
        b = self.flat.eblk[e]
        if b >= 0:
            return self.count[b] < self.flat.bcap[b]
        return self._find(int(self.flat.eu[e])) != self._find(int(self.flat.ev[e]))

    def add(self, e: int) -> None:
        b = self.flat.eblk[e]
        if b >= 0:
            self.count[b] += 1
        else:
            self.parent[self._find(int(self.flat.eu[e]))] = self._find(int(self.flat.ev[e]))


# ---------------------------------------------------------------------------
# Oracles


def is_independent(spec: MatroidSpec, S: Iterable[int]) -> bool:
    S = set(S)
    if isinstance(spec, Uniform):
        return len(S) <= spec.k
    if isinstance(spec, Partition):
        return all(len(S.intersection(els)) <= cap for els, cap in spec.blocks)
    if isinstance(spec, Graphic):
        parent = list(range(spec.n))

        def find(a: int) -> int:
            while parent[a] != a:
                a = parent[a]
            return a

        for e in S:
            u, v = spec.edges[e]
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
        return True
    if isinstance(spec, DirectSum):
        lo = 0
        for part in spec.parts:
            hi = lo + part.size
            if not is_independent(part, [e - lo for e in S if lo <= e < hi]):
                return False
            lo = hi
        return True
    raise TypeError(f"unknown matroid spec {spec!r}")


def rank(spec: MatroidSpec, S: Iterable[int] | None = None) -> int:
    """Size of a maximal independent subset of S (default: the ground set)."""
    flat = flatten(spec)
    g = _Greedy(flat)
    r = 0
    for e in sorted(range(flat.m) if S is None else set(S)):
        if g.can_add(e):
            g.add(e)
            r += 1
    return r


@dataclass(frozen=True)
class Basis:
    elements: tuple[int, ...]
    weight: int


def lex_min_basis(spec: MatroidSpec, w: Sequence[int], X: Iterable[int] = (),
                  flat: Flat | None = None) -> Basis | None:
    """Lexicographically smallest basis avoiding X, or None if X drops the rank."""
    flat = flat if flat is not None else flatten(spec)
    X = set(X)
    g = _Greedy(flat)
    chosen = []
    for e in range(flat.m):
        if e not in X and g.can_add(e):
            g.add(e)
            chosen.append(e)
    full = rank(spec) if flat is None else _full_rank(flat)
    if len(chosen) < full:
        return None
    return Basis(tuple(chosen), int(sum(w[e] for e in chosen)))


def _full_rank(flat: Flat) -> int:
    g = _Greedy(flat)
    r = 0
    for e in range(flat.m):
        if g.can_add(e):
            g.add(e)
            r += 1
    return r


def replacement_element(spec: MatroidSpec, w: Sequence[int], X: Iterable[int],
                        basis: Basis, e: int, flat: Flat | None = None) -> int | None:
    """The element entering the lex-min basis when e is additionally deleted."""
    if e not in basis.elements:
        raise ValueError(f"element {e} is not in the basis")
    nxt = lex_min_basis(spec, w, set(X) | {e}, flat=flat)
    if nxt is None:
        return None
    (new,) = set(nxt.elements) - set(basis.elements)
    return new


# ---------------------------------------------------------------------------
# Instances and normalization


@dataclass(frozen=True)
class Instance:
    matroid: MatroidSpec
    w: tuple[int, ...]
    c: tuple[int, ...]
    C: int
    perm: tuple[int, ...] = ()
    target: int | None = None
    dual: Graphic | None = None  # planar dual, indexed like the raw elements
    deleted: tuple[int, ...] = ()  # zero-cost raw elements removed by normalize
    full_rank: int | None = None  # rank of the raw matroid
    source: "Instance | None" = field(default=None, repr=False, compare=False)
    inf_cost: int | None = None  # sentinel standing for an uninterdictable element
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def m(self) -> int:
        return len(self.w)

    def with_capacity(self, C: int) -> "Instance":
        return replace(self, C=int(C))


def satisfies_order(spec: MatroidSpec, w: Sequence[int]) -> bool:
    """Whether weights ascend inside every part (blocks for partitions)."""
    def ascending(idx: Sequence[int]) -> bool:
        return all(w[a] <= w[b] for a, b in zip(idx, idx[1:]))

    def walk(s: MatroidSpec, lo: int) -> bool:
        if isinstance(s, Partition):
            return all(ascending([lo + e for e in sorted(els)]) for els, _ in s.blocks)
        if isinstance(s, DirectSum):
            ok = True
            for part in s.parts:
                ok = ok and walk(part, lo)
                lo += part.size
            return ok
        return ascending(list(range(lo, lo + s.size)))

    return walk(spec, 0)


def _graph_connected(g: Graphic) -> bool:
    if g.n <= 1:
        return True
    parent = list(range(g.n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    comps = g.n
    for u, v in g.edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            comps -= 1
    return comps == 1


def _normalize_spec(spec: MatroidSpec, w: Sequence[int], keep: Sequence[bool],
                    lo: int) -> tuple[MatroidSpec, list[int]]:
    """Return the reordered spec and the raw indices (offset by lo) in new order."""
    def order(idx: Iterable[int]) -> list[int]:
        return sorted((e for e in idx if keep[e]), key=lambda e: (w[e], e))

    if isinstance(spec, Uniform):
        idx = order(range(lo, lo + spec.m))
        return Uniform(len(idx), min(spec.k, len(idx))), idx
    if isinstance(spec, Partition):
        blocks = []
        idx: list[int] = []
        for els, cap in spec.blocks:
            part = order(lo + e for e in els)
            blocks.append((tuple(range(len(idx), len(idx) + len(part))), min(cap, len(part))))
            idx.extend(part)
        return Partition(tuple(blocks)), idx
    if isinstance(spec, Graphic):
        idx = order(range(lo, lo + spec.size))
        return Graphic(spec.n, tuple(spec.edges[e - lo] for e in idx)), idx
    if isinstance(spec, DirectSum):
        parts = []
        idx = []
        for part in spec.parts:
            p, sub = _normalize_spec(part, w, keep, lo)
            parts.append(p)
            idx.extend(sub)
            lo += part.size
        return DirectSum(tuple(parts)), idx
    raise TypeError(f"unknown matroid spec {spec!r}")


def _reject_disconnected(spec: MatroidSpec) -> None:
    if isinstance(spec, Graphic) and not _graph_connected(spec):
        raise ValueError("graphic matroid input must be a connected graph")
    if isinstance(spec, DirectSum):
        for part in spec.parts:
            _reject_disconnected(part)


def normalize(raw: Instance) -> Instance:
    """Reorder elements so weights ascend per component and drop zero-cost ones."""
    check_spec(raw.matroid)
    _reject_disconnected(raw.matroid)
    m = raw.matroid.size
    if len(raw.w) != m or len(raw.c) != m:
        raise ValueError("weight/cost vectors must match the ground set size")
    if any(ci < 0 for ci in raw.c) or raw.C < 0:
        raise ValueError("costs and capacity must be non-negative")
    keep = [ci > 0 for ci in raw.c]
    spec, idx = _normalize_spec(raw.matroid, raw.w, keep, 0)
    return Instance(
        matroid=spec,
        w=tuple(int(raw.w[e]) for e in idx),
        c=tuple(int(raw.c[e]) for e in idx),
        C=int(raw.C),
        perm=tuple(idx),
        target=raw.target,
        dual=raw.dual,
        deleted=tuple(e for e in range(m) if not keep[e]),
        full_rank=rank(raw.matroid),
        source=raw,
        inf_cost=raw.inf_cost,
        meta=dict(raw.meta),
    )


def to_original(inst: Instance, elements: Iterable[int]) -> tuple[int, ...]:
    """Map normalized indices back to raw indices (identity if never normalized)."""
    if not inst.perm:
        return tuple(sorted(elements))
    return tuple(sorted(inst.perm[e] for e in elements))


# ---------------------------------------------------------------------------
# Replacement chains


def replacement_chain(inst: Instance, X: Iterable[int], e: int,
                      basis: Basis | None = None, flat: Flat | None = None
                      ) -> tuple[list[int], int | None]:
    """Chain r_0=e, r_1, ... of successive replacements that fit the budget.

    Returns ``(chain, tail)`` where ``tail`` is the replacement for the last
    chain element (it may not fit the budget, or be None when none exists).
    """
    flat = flat if flat is not None else flatten(inst.matroid)
    X = set(X)
    basis = basis if basis is not None else lex_min_basis(inst.matroid, inst.w, X, flat=flat)
    if basis is None or e not in basis.elements:
        raise ValueError("e must belong to the lex-min basis of E \\ X")
    spent = sum(inst.c[x] for x in X) + inst.c[e]
    if spent > inst.C:
        raise ValueError("no capacity to interdict e")
    chain = [e]
    while True:
        nxt = replacement_element(inst.matroid, inst.w, X, basis, chain[-1], flat=flat)
        if nxt is None or spent + inst.c[nxt] > inst.C:
            return chain, nxt
        X.add(chain[-1])
        basis = lex_min_basis(inst.matroid, inst.w, X, flat=flat)
        chain.append(nxt)
        spent += inst.c[nxt]


# ---------------------------------------------------------------------------
# Cocircuits and duality


def _cheapest(elements: Sequence[int], c: Sequence[int], count: int) -> tuple[tuple[int, ...], int]:
    picked = sorted(elements, key=lambda e: (c[e], e))[:count]
    return tuple(sorted(picked)), int(sum(c[e] for e in picked))


def min_rank_reducer(spec: MatroidSpec, c: Sequence[int],
                     within: Iterable[int] | None = None) -> tuple[tuple[int, ...], int] | None:
    """Cheapest X inside ``within`` with r(within minus X) < r(E).

    ``within`` defaults to the ground set, which yields a minimum-cost
    cocircuit.  Returns None when no such X exists (rank-0 matroids).
    Cost 0 with X empty means ``within`` is already rank deficient.
    """
    from . import graph

    def walk(s: MatroidSpec, lo: int) -> tuple[tuple[int, ...], int] | None:
        hi = lo + s.size
        sub = [e for e in range(lo, hi) if allowed(e)]
        if isinstance(s, Uniform):
            if s.k == 0:
                return None
            if len(sub) < s.k:
                return (), 0
            return _cheapest(sub, c, len(sub) - s.k + 1)
        if isinstance(s, Partition):
            best = None
            for els, cap in s.blocks:
                if cap == 0:
                    continue
                blk = [lo + e for e in els if allowed(lo + e)]
                cand = ((), 0) if len(blk) < cap else _cheapest(blk, c, len(blk) - cap + 1)
                if best is None or cand[1] < best[1]:
                    best = cand
            return best
        if isinstance(s, Graphic):
            if s.n <= 1:
                return None
            g = graph.Multigraph(s.n, tuple(s.edges[e - lo] for e in sub))
            value, side = graph.global_min_cut(g, [c[e] for e in sub])
            crossing = tuple(e for e in sub
                             if (s.edges[e - lo][0] in side) != (s.edges[e - lo][1] in side))
            return crossing, int(value)
        if isinstance(s, DirectSum):
            best = None
            for part in s.parts:
                cand = walk(part, lo)
                if cand is not None and (best is None or cand[1] < best[1]):
                    best = cand
                lo += part.size
            return best
        raise TypeError(f"unknown matroid spec {s!r}")

    allow = None if within is None else set(within)
    allowed = (lambda e: True) if allow is None else allow.__contains__
    return walk(spec, 0)


def min_cost_cocircuit(spec: MatroidSpec, c: Sequence[int]) -> tuple[tuple[int, ...], int] | None:
    """Cheapest set meeting every basis; None for rank-0 matroids."""
    return min_rank_reducer(spec, c)


def dual(spec: MatroidSpec, dual_graph: Graphic | None = None) -> MatroidSpec:
    if isinstance(spec, Uniform):
        return Uniform(spec.m, spec.m - spec.k)
    if isinstance(spec, Partition):
        return Partition(tuple((els, len(els) - cap) for els, cap in spec.blocks))
    if isinstance(spec, Graphic):
        if dual_graph is None:
            raise Unsupported("graphic dual needs a caller-supplied planar dual graph")
        if dual_graph.size != spec.size:
            raise ValueError("dual graph must have one edge per primal edge")
        return dual_graph
    if isinstance(spec, DirectSum):
        if dual_graph is not None:
            raise Unsupported("dual graphs for direct-sum parts are not supported")
        return DirectSum(tuple(dual(p) for p in spec.parts))
    raise TypeError(f"unknown matroid spec {spec!r}")


def all_bases(spec: MatroidSpec) -> list[frozenset[int]]:
    """Exhaustive basis list; for tests on tiny ground sets only."""
    m = spec.size
    r = rank(spec)
    return [frozenset(S) for S in itertools.combinations(range(m), r)
            if is_independent(spec, S)]
