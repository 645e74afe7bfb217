"""Exhaustive reference solvers for small instances.

They work on the raw instance with their own weight-sorted greedy and the
plain independence oracle, so they share no code with the search beyond
``is_independent``.
"""
from __future__ import annotations

import math
from typing import Sequence

from .matroid import Graphic, Instance, MatroidSpec, is_independent, rank
from .search import Solution

DEFAULT_CAP = 20


def _raw(inst: Instance) -> Instance:
    return inst.source if inst.source is not None else inst


class _Indep:
    """Incremental independence test: a plain union-find for graphs, the
    generic oracle otherwise."""

    def __init__(self, spec: MatroidSpec):
        self.spec = spec
        self.graph = isinstance(spec, Graphic)
        self.parent = list(range(spec.n)) if self.graph else None
        self.chosen: list[int] = []

    def _find(self, a: int) -> int:
        while self.parent[a] != a:
            a = self.parent[a]
        return a

    def try_add(self, e: int) -> bool:
        if self.graph:
            u, v = self.spec.edges[e]
            a, b = self._find(u), self._find(v)
            if a == b:
                return False
            self.parent[a] = b
        elif not is_independent(self.spec, self.chosen + [e]):
            return False
        self.chosen.append(e)
        return True


def min_basis_weight(spec: MatroidSpec, w: Sequence[int], X, full: int) -> float:
    """Kruskal over elements sorted by weight; inf if E minus X has lower rank."""
    X = set(X)
    ind = _Indep(spec)
    for e in sorted(range(len(w)), key=lambda e: (w[e], e)):
        if e not in X:
            ind.try_add(e)
    if len(ind.chosen) < full:
        return math.inf
    return sum(w[e] for e in ind.chosen)


def max_basis_weight_containing(spec: MatroidSpec, w: Sequence[int], X, full: int) -> float:
    X = sorted(set(X))
    if not is_independent(spec, X):
        return -math.inf
    chosen = list(X)
    for e in sorted(range(len(w)), key=lambda e: (-w[e], e)):
        if e not in chosen and is_independent(spec, chosen + [e]):
            chosen.append(e)
    return sum(w[e] for e in chosen) if len(chosen) == full else -math.inf


def _maximal_sets(c: Sequence[int], C: int, items: list[int]):
    """Budget-maximal subsets of items (no left-out item still fits)."""
    chosen: list[int] = []

    def rec(i: int, left: int):
        if i == len(items):
            if all(c[e] > left for e in items if e not in chosen):
                yield tuple(chosen)
            return
        e = items[i]
        if c[e] <= left:
            chosen.append(e)
            yield from rec(i + 1, left - c[e])
            chosen.pop()
        yield from rec(i + 1, left)

    yield from rec(0, C)


def _check_cap(items, cap):
    if len(items) > cap:
        raise ValueError(f"{len(items)} interdictable elements exceed the oracle cap {cap}")


def _solution(raw: Instance, X, value: float, Y=None) -> Solution:
    return Solution(tuple(sorted(X)), Y, value, True, math.isinf(value),
                    int(sum(raw.c[e] for e in X)))


def _basis(raw: Instance, X) -> tuple[int, ...]:
    chosen: list[int] = []
    for e in sorted(range(len(raw.w)), key=lambda e: (raw.w[e], e)):
        if e not in X and is_independent(raw.matroid, chosen + [e]):
            chosen.append(e)
    return tuple(sorted(chosen))


def brute_force_interdiction(inst: Instance, cap: int = DEFAULT_CAP) -> Solution:
    """Maximise the minimum basis weight over all X with c(X) <= C.

    Only budget-maximal X are enumerated: removing more never lowers the
    minimum basis weight.
    """
    raw = _raw(inst)
    full = rank(raw.matroid)
    items = [e for e in range(len(raw.w)) if raw.c[e] <= raw.C]
    _check_cap(items, cap)
    best, bestX = -math.inf, ()
    for X in _maximal_sets(raw.c, raw.C, items):
        v = min_basis_weight(raw.matroid, raw.w, X, full)
        if v > best:
            best, bestX = v, X
            if math.isinf(v):
                break
    Y = None if math.isinf(best) else _basis(raw, set(bestX))
    return _solution(raw, bestX, best, Y)


def brute_force_blocker(inst: Instance, R: int, cap: int = DEFAULT_CAP) -> Solution:
    """Cheapest X (any cost) whose removal makes the minimum basis weight >= R."""
    raw = _raw(inst)
    full = rank(raw.matroid)
    m = len(raw.w)
    _check_cap(range(m), cap)
    best = [math.inf, None]
    chosen: list[int] = []

    def rec(i: int, spent: int):
        if spent >= best[0]:
            return
        if i == m:
            if min_basis_weight(raw.matroid, raw.w, chosen, full) >= R:
                best[0], best[1] = spent, tuple(chosen)
            return
        chosen.append(i)
        rec(i + 1, spent + raw.c[i])
        chosen.pop()
        rec(i + 1, spent)

    rec(0, 0)
    if best[1] is None:
        raise ValueError("target is unreachable")
    X = best[1]
    v = min_basis_weight(raw.matroid, raw.w, X, full)
    return _solution(raw, X, v, None if math.isinf(v) else _basis(raw, set(X)))


def brute_force_inclusion(inst: Instance, cap: int = DEFAULT_CAP) -> Solution:
    """Minimise over X with c(X) <= C the heaviest basis containing X."""
    raw = _raw(inst)
    full = rank(raw.matroid)
    items = [e for e in range(len(raw.w)) if raw.c[e] <= raw.C]
    _check_cap(items, cap)
    best, bestX = math.inf, ()
    for X in _maximal_sets(raw.c, raw.C, items):
        v = max_basis_weight_containing(raw.matroid, raw.w, X, full)
        if v < best:
            best, bestX = v, X
    return Solution(tuple(bestX), None, best, True, math.isinf(best),
                    int(sum(raw.c[e] for e in bestX)))


def knapsack_dp(a: Sequence[int], p: Sequence[int], C: int) -> int:
    """Textbook 0-1 knapsack table over capacities 0..C."""
    best = [0] * (C + 1)
    for size, profit in zip(a, p):
        for r in range(C, size - 1, -1):
            best[r] = max(best[r], best[r - size] + profit)
    return best[C]
