"""Exact solvers: branch-and-bound for interdiction and blocker problems,
the greedy lower bound, preprocessing, and the bound-building schedule.
"""
from __future__ import annotations

import logging
import math
import threading
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from . import _kernel as K
from . import bounds
from .matroid import (Flat, Instance, flatten, lex_min_basis, min_cost_cocircuit,
                      min_rank_reducer, normalize, rank, replacement_chain)

log = logging.getLogger(__name__)

MODES = ("parallel", "interleaved", "bounds-first", "no-bounds")


@dataclass
class SolverConfig:
    time_limit: float = math.inf  # wall-clock seconds
    mode: str = "parallel"
    max_prefix_bits: int = 8
    mem_limit: int = 1 << 30
    round_k: int = 1
    greedy: bool = True
    preprocess: bool = True
    strengthen: bool = True
    chunk_nodes: int = 1 << 14
    # diagnostics for tests: how many visited X patterns / incumbent values to keep
    visit_log: int = 0
    trace: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.max_prefix_bits < 0 or self.round_k < 1:
            raise ValueError("need max_prefix_bits >= 0 and round_k >= 1")


@dataclass
class SearchStats:
    nodes: int = 0
    prunes: int = 0
    mbar: int = 0  # number of leading elements that may be interdicted (1-based bound)
    p_used: int | None = None
    root_lb: float | None = None
    root_ub: float | None = None
    value: float | None = None
    optimal: bool = False
    cpu_seconds: float = 0.0
    wall_seconds: float = 0.0
    updates: int = 0
    visits: list[int] = field(default_factory=list, repr=False)
    trace: list[int] = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        def num(x):
            if x is None:
                return None
            if isinstance(x, float) and math.isinf(x):
                return "inf" if x > 0 else "-inf"
            return x

        d = asdict(self)
        out = {k: num(d[k]) for k in ("nodes", "prunes", "mbar", "p_used", "root_lb",
                                      "root_ub", "value", "optimal", "cpu_seconds")}
        return out


@dataclass(frozen=True)
class Solution:
    X: tuple[int, ...]  # raw (input) indices
    Y: tuple[int, ...] | None
    value: float  # w(Y); inf when X leaves no basis
    proven_optimal: bool
    rank_reducible: bool = False
    cost: int = 0


def ensure_normalized(inst: Instance) -> Instance:
    return inst if inst.full_rank is not None else normalize(inst)


def _raw_cost(norm: Instance, X: Sequence[int]) -> int:
    src = norm.source
    return int(sum(src.c[x] for x in X)) if src is not None else int(sum(norm.c[x] for x in X))


def _to_solution(norm: Instance, Xn: Sequence[int], optimal: bool, flat: Flat | None = None,
                 force_inf: bool = False) -> Solution:
    """Build a Solution from normalized interdicted elements."""
    perm = norm.perm or tuple(range(norm.m))
    Xo = tuple(sorted([perm[x] for x in Xn] + list(norm.deleted)))
    basis = None if force_inf else lex_min_basis(norm.matroid, norm.w, Xn, flat=flat)
    if basis is None or (norm.full_rank is not None and len(basis.elements) < norm.full_rank):
        return Solution(Xo, None, math.inf, optimal, True, _raw_cost(norm, Xo))
    Yo = tuple(sorted(perm[y] for y in basis.elements))
    return Solution(Xo, Yo, basis.weight, optimal, False, _raw_cost(norm, Xo))


# ---------------------------------------------------------------------------
# DynInterdict


class DynInterdict:
    """Interdiction set X, lex-min basis Y of M minus X, and a cursor e.

    Elements of Y below the cursor are committed; the cursor is the next
    undecided element of Y (``m`` once every basis element is decided).
    """

    def __init__(self, inst: Instance, flat: Flat | None = None, pi: np.ndarray | None = None):
        self.inst = inst
        flat = flat if flat is not None else flatten(inst.matroid)
        self.flat = flat
        m = inst.m
        self.eu = flat.eu.copy()
        self.ev = flat.ev.copy()
        self.eblk = flat.eblk.copy()
        self.bcap = flat.bcap.copy()
        self.w = np.asarray(inst.w, dtype=np.int64)
        self.c = np.asarray(inst.c, dtype=np.int64)
        nv = max(flat.n_vertices, 1)
        self.parent = np.arange(nv, dtype=np.int64)
        self.usize = np.ones(nv, dtype=np.int64)
        self.bcnt = np.zeros(max(len(flat.bcap), 1), dtype=np.int64)
        if len(self.bcap) == 0:
            self.bcap = np.zeros(1, dtype=np.int64)
        self.ulog = np.zeros(2 * m + 2, dtype=np.int64)
        self.fen = np.zeros(m + 1, dtype=np.int64)
        self.inY = np.zeros(m, dtype=np.bool_)
        self.inX = np.zeros(m, dtype=np.bool_)
        self.xe = np.zeros(m + 1, dtype=np.int64)
        self.xf = np.zeros(m + 1, dtype=np.int64)
        self.sstack = np.zeros(m + 1, dtype=np.int64)
        self.pi = pi if pi is not None else np.zeros((m, 1), dtype=np.int64)
        self.sc = np.zeros(K.N_SCALARS, dtype=np.int64)
        basis = lex_min_basis(inst.matroid, inst.w, (), flat=flat)
        if basis is None:
            raise ValueError("the matroid has no basis after normalization")
        for y in basis.elements:
            self.inY[y] = True
            K.fen_add(self.fen, y, 1)
        self.sc[K.WY] = basis.weight
        self.sc[K.CUR] = K.next_member(self.fen, 0)

    # -- operations -------------------------------------------------------
    def skip(self) -> None:
        if self.e >= self.inst.m:
            raise RuntimeError("no undecided basis element")
        K.dyn_skip(self.eu, self.ev, self.eblk, self.parent, self.usize, self.bcnt, self.ulog,
                   self.fen, self.sc)

    def unskip(self) -> None:
        K.dyn_unskip(self.parent, self.usize, self.bcnt, self.ulog, self.fen, self.sc)

    def interdict(self) -> bool:
        if self.e >= self.inst.m:
            raise RuntimeError("no undecided basis element")
        return bool(K.dyn_interdict(self.eu, self.ev, self.eblk, self.bcap, self.w, self.c,
                                    self.parent, self.usize, self.bcnt, self.ulog, self.fen,
                                    self.inY, self.inX, self.xe, self.xf, self.sstack, self.pi,
                                    self.sc))

    def uninterdict(self) -> None:
        K.dyn_uninterdict(self.w, self.c, self.fen, self.inY, self.inX, self.xe, self.xf,
                          self.sstack, self.sc)

    # -- views ------------------------------------------------------------
    @property
    def e(self) -> int:
        return int(self.sc[K.CUR])

    @property
    def X(self) -> frozenset[int]:
        return frozenset(int(x) for x in np.flatnonzero(self.inX))

    @property
    def Y(self) -> frozenset[int]:
        return frozenset(int(y) for y in np.flatnonzero(self.inY))

    @property
    def weight(self) -> int:
        return int(self.sc[K.WY])

    @property
    def cost(self) -> int:
        return int(self.sc[K.COST])

    def snapshot(self) -> tuple:
        arrays = (self.parent, self.usize, self.bcnt, self.fen, self.inY, self.inX)
        return tuple(a.tobytes() for a in arrays) + (tuple(self.sc[:K.DEPTH]),)


# ---------------------------------------------------------------------------
# Preprocessing


def rank_reducer_within_budget(norm: Instance) -> tuple[tuple[int, ...], int] | None:
    """Cheapest set whose removal drops the rank, if it fits the capacity."""
    if norm.full_rank is not None and rank(norm.matroid) < norm.full_rank:
        return (), 0
    cc = min_cost_cocircuit(norm.matroid, norm.c)
    if cc is not None and cc[1] <= norm.C:
        return cc
    return None


def weight_cutoff(norm: Instance, C: int | None = None) -> float:
    """Smallest distinct weight w'_k such that E_<=k cannot lose rank within budget.

    Interdicting elements of weight >= w'_k never changes the minimum basis
    weight, so only lighter elements need to be considered.
    """
    C = norm.C if C is None else C
    distinct = sorted(set(norm.w))
    if not distinct:
        return math.inf

    def safe(k: int) -> bool:
        within = [e for e in range(norm.m) if norm.w[e] <= distinct[k]]
        red = min_rank_reducer(norm.matroid, norm.c, within)
        return red is None or red[1] > C

    lo, hi = 0, len(distinct) - 1
    if not safe(hi):
        return math.inf
    while lo < hi:
        mid = (lo + hi) // 2
        if safe(mid):
            hi = mid
        else:
            lo = mid + 1
    return distinct[lo]


def compute_mbar(inst: Instance, C: int | None = None) -> int:
    """Largest element index (0-based) worth interdicting; -1 if none is."""
    norm = ensure_normalized(inst)
    cut = weight_cutoff(norm, C)
    idx = [e for e in range(norm.m) if norm.w[e] < cut]
    return max(idx) if idx else -1


@dataclass
class _Prepared:
    norm: Instance
    flat: Flat
    allowed: np.ndarray
    e_stop: int
    sufmin: np.ndarray
    space: bounds.StateSpace
    C: int  # capacity the bound tables span

    @property
    def bound_inst(self) -> Instance:
        return self.norm.with_capacity(self.C)


def prepare(norm: Instance, C: int, cfg: SolverConfig) -> _Prepared:
    c = np.asarray(norm.c, dtype=np.int64)
    allowed = c <= C
    if cfg.preprocess:
        cut = weight_cutoff(norm, C)
        allowed &= np.asarray(norm.w, dtype=np.float64) < cut
    idx = np.flatnonzero(allowed)
    e_stop = int(idx[-1]) + 1 if len(idx) else 0
    sufmin = np.full(norm.m + 1, K.INF, dtype=np.int64)
    for e in range(norm.m - 1, -1, -1):
        sufmin[e] = min(sufmin[e + 1], c[e]) if allowed[e] else sufmin[e + 1]
    bi = norm.with_capacity(C)
    space = bounds.statespace(bi, cfg.round_k, allowed)
    return _Prepared(norm, flatten(norm.matroid), allowed, e_stop, sufmin, space, C)


# ---------------------------------------------------------------------------
# Greedy lower bound


def _greedy_set(norm: Instance, allowed: np.ndarray, flat: Flat) -> list[int]:
    X: set[int] = set()
    spent = 0
    while True:
        basis = lex_min_basis(norm.matroid, norm.w, X, flat=flat)
        if basis is None:
            break
        best_e, best_ratio = None, None
        for e in basis.elements:
            if not allowed[e] or spent + norm.c[e] > norm.C:
                continue
            chain, tail = replacement_chain(norm, X, e, basis=basis, flat=flat)
            paid = 0
            for j, r in enumerate(chain):
                paid += norm.c[r]
                rep = chain[j + 1] if j + 1 < len(chain) else tail
                if rep is None:
                    continue
                ratio = Fraction(norm.w[rep] - norm.w[e], paid)
                if best_ratio is None or ratio > best_ratio:
                    best_e, best_ratio = e, ratio
        if best_e is None:
            break
        X.add(best_e)
        spent += norm.c[best_e]
    return sorted(X)


def greedy_lower_bound(inst: Instance, allowed: np.ndarray | None = None) -> Solution:
    """Repeatedly interdict the basis element with the best gain-per-cost chain prefix.

    The gain of interdicting the chain prefix r_0..r_j is the weight of the
    element that finally replaces r_0, i.e. r_{j+1} (or the first replacement
    beyond the budget-truncated chain), minus w(r_0).
    """
    norm = ensure_normalized(inst)
    flat = flatten(norm.matroid)
    if allowed is None:
        allowed = np.asarray(norm.c) <= norm.C
    return _to_solution(norm, _greedy_set(norm, allowed, flat), False, flat=flat)


# ---------------------------------------------------------------------------
# Bound schedule


class _Builder:
    """Produces bound tables p = 0, 1, ... and publishes the latest one."""

    def __init__(self, prep: _Prepared, cfg: SolverConfig):
        self.prep = prep
        self.cfg = cfg
        self.latest: bounds.BoundTable | None = None
        self.stop = threading.Event()
        self._gen = self._stream()
        self.finished = False

    def _stream(self) -> Iterator[None]:
        prep, cfg = self.prep, self.cfg
        pmax = 0
        if cfg.strengthen:
            useful = bounds.max_useful_prefix(prep.norm, prep.space, prep.allowed)
            pmax = min(cfg.max_prefix_bits, useful)
        for p in range(pmax + 1):
            try:
                levels = bounds.build_levels(prep.bound_inst, prep.space, p, cfg.round_k,
                                             prep.allowed, cfg.mem_limit)
                for item in levels:
                    if item is not None:
                        self.latest = item  # attribute store publishes atomically
                    yield None
            except bounds.MemoryBudgetExceeded as exc:
                log.info("stopping bound levels at p=%d: %s", p, exc)
                break

    def step(self) -> bool:
        """Advance one element row; False once every level is done."""
        if self.finished:
            return False
        try:
            next(self._gen)
            return True
        except StopIteration:
            self.finished = True
            return False

    def run_until(self, deadline: float) -> None:
        while time.perf_counter() < deadline and not self.stop.is_set() and self.step():
            pass

    def run_all(self) -> None:
        while not self.stop.is_set() and self.step():
            pass


class _Search:
    def __init__(self, prep: _Prepared, cfg: SolverConfig, blocker: bool, target: int,
                 best: np.ndarray, bestX: np.ndarray):
        self.prep = prep
        self.cfg = cfg
        self.blocker = blocker
        self.target = target
        self.best = best
        self.bestX = bestX
        self.dyn = DynInterdict(prep.norm, prep.flat, prep.space.pi)
        m = prep.norm.m
        self.frames = np.zeros(m + 2, dtype=np.int8)
        self.stats = np.zeros(5, dtype=np.int64)
        self.visits = np.zeros(cfg.visit_log, dtype=np.int64)
        self.trace = np.zeros(cfg.trace, dtype=np.int64)
        self.dummy = np.zeros((1, 1, 1, 1), dtype=np.int64)
        self.status = K.EXHAUSTED
        self.p_used: int | None = None
        self.table: bounds.BoundTable | None = None
        self.builder: _Builder | None = None

    def chunk(self, table: bounds.BoundTable | None, budget: int) -> int:
        d = self.dyn
        if table is not None:
            self.p_used = table.p
            self.table = table
            ftab, have, p, Kr, Cr = table.values, True, table.p, table.K, table.C
        else:
            ftab, have, p, Kr, Cr = self.dummy, False, 0, 1, 0
        self.status = K.run(d.eu, d.ev, d.eblk, d.bcap, d.w, d.c, d.parent, d.usize, d.bcnt,
                            d.ulog, d.fen, d.inY, d.inX, d.xe, d.xf, d.sstack, d.pi, d.sc,
                            self.frames, self.blocker, self.prep.C, self.target,
                            self.prep.allowed, self.prep.e_stop, self.prep.sufmin,
                            ftab, have, p, Kr, Cr, self.best, self.bestX, self.stats,
                            budget, self.visits, self.trace)
        return self.status

    @property
    def done(self) -> bool:
        return self.status != K.EXHAUSTED


def _drive(search: _Search, cfg: SolverConfig, t0: float) -> bool:
    """Run the search under the configured schedule; returns False on timeout."""
    deadline = t0 + cfg.time_limit
    builder = None if cfg.mode == "no-bounds" else _Builder(search.prep, cfg)
    search.builder = builder

    def timed_out() -> bool:
        return time.perf_counter() >= deadline

    if builder is None:
        while not search.done:
            if timed_out():
                return False
            search.chunk(None, cfg.chunk_nodes)
        return True

    if cfg.mode == "bounds-first":
        builder.run_until(deadline)
        while not search.done:
            if timed_out():
                return False
            search.chunk(builder.latest, cfg.chunk_nodes)
        return True

    if cfg.mode == "parallel":
        thread = threading.Thread(target=builder.run_all, name="bound-builder", daemon=True)
        thread.start()
        try:
            while not search.done:
                if timed_out():
                    return False
                search.chunk(builder.latest, cfg.chunk_nodes)
            return True
        finally:
            builder.stop.set()
            thread.join()

    # interleaved: one thread alternates between builder and search, with a
    # slice that starts at 10 ms and doubles after every switch
    slice_s = 0.01
    small = max(1, cfg.chunk_nodes // 16)
    while not search.done:
        if timed_out():
            return False
        if not builder.finished:
            builder.run_until(min(deadline, time.perf_counter() + slice_s))
            slice_s *= 2
        end = min(deadline, time.perf_counter() + slice_s)
        while not search.done and time.perf_counter() < end:
            search.chunk(builder.latest, small)
        if not builder.finished:
            slice_s *= 2
    return True


def _finish_stats(stats: SearchStats, search: _Search | None, t0: float, c0: float) -> None:
    if search is not None:
        stats.nodes = int(search.stats[K.S_NODES])
        stats.prunes = int(search.stats[K.S_PRUNES])
        stats.updates = int(search.stats[K.S_UPDATES])
        stats.p_used = search.p_used
        stats.visits = [int(v) for v in search.visits[:search.stats[K.S_VISITS]]]
        stats.trace = [int(v) for v in search.trace[:search.stats[K.S_TRACE]]]
    stats.cpu_seconds = time.process_time() - c0
    stats.wall_seconds = time.perf_counter() - t0


def _root_ub(prep: _Prepared, table: bounds.BoundTable | None, F0: int) -> float | None:
    if table is None:
        return None
    v = table.query(0, table.rounded(prep.C), table.phi0, 0)
    return math.inf if math.isinf(v) else F0 + v


# ---------------------------------------------------------------------------
# Public solvers


def solve_interdiction(inst: Instance, cfg: SolverConfig | None = None) -> tuple[Solution, SearchStats]:
    cfg = cfg or SolverConfig()
    t0, c0 = time.perf_counter(), time.process_time()
    norm = ensure_normalized(inst)
    stats = SearchStats()
    flat = flatten(norm.matroid)

    red = rank_reducer_within_budget(norm)
    if red is not None:
        sol = _to_solution(norm, red[0], True, flat=flat, force_inf=True)
        stats.value, stats.optimal = math.inf, True
        _finish_stats(stats, None, t0, c0)
        return sol, stats

    prep = prepare(norm, norm.C, cfg)
    stats.mbar = prep.e_stop
    seedX = _greedy_set(norm, prep.allowed, flat) if cfg.greedy else []
    base = lex_min_basis(norm.matroid, norm.w, seedX, flat=flat)
    best = np.array([base.weight, sum(norm.c[x] for x in seedX), 0], dtype=np.int64)
    bestX = np.zeros(norm.m, dtype=np.bool_)
    bestX[seedX] = True
    stats.root_lb = int(best[0])

    search = _Search(prep, cfg, False, 0, best, bestX)
    finished = _drive(search, cfg, t0)
    F0 = lex_min_basis(norm.matroid, norm.w, (), flat=flat).weight
    final = search.builder.latest if search.builder is not None else None
    stats.root_ub = _root_ub(prep, final or search.table, F0)

    Xn = [int(x) for x in np.flatnonzero(bestX)]
    if search.status == K.RANK_REDUCIBLE:
        sol = _to_solution(norm, Xn, True, flat=flat, force_inf=True)
    else:
        sol = _to_solution(norm, Xn, finished and search.status == K.DONE, flat=flat)
    stats.value, stats.optimal = sol.value, sol.proven_optimal
    _finish_stats(stats, search, t0, c0)
    return sol, stats


def target_from_gamma(inst: Instance, gamma: float | str | Fraction) -> int:
    """R = ceil((w_max_basis - w_min_basis) * gamma + w_min_basis)."""
    norm = ensure_normalized(inst)
    g = Fraction(str(gamma)) if not isinstance(gamma, Fraction) else gamma
    lo = lex_min_basis(norm.matroid, norm.w).weight
    neg = [-x for x in norm.w]
    # max-weight basis: greedy over elements in descending weight order
    order = sorted(range(norm.m), key=lambda e: (neg[e], e))
    hi = _greedy_in_order(norm, order)
    return math.ceil((hi - lo) * g + lo)


def _greedy_in_order(norm: Instance, order: Sequence[int]) -> int:
    from .matroid import _Greedy
    g = _Greedy(flatten(norm.matroid))
    total = 0
    for e in order:
        if g.can_add(e):
            g.add(e)
            total += norm.w[e]
    return total


def solve_blocker(inst: Instance, R: int, cfg: SolverConfig | None = None) -> tuple[Solution, SearchStats]:
    """Cheapest X whose removal lifts the minimum basis weight to at least R."""
    cfg = cfg or SolverConfig()
    t0, c0 = time.perf_counter(), time.process_time()
    norm = ensure_normalized(inst)
    stats = SearchStats()
    flat = flatten(norm.matroid)

    if norm.full_rank is not None and rank(norm.matroid) < norm.full_rank:
        sol = _to_solution(norm, (), True, flat=flat, force_inf=True)
        _finish_stats(stats, None, t0, c0)
        return sol, stats
    base = lex_min_basis(norm.matroid, norm.w, (), flat=flat)
    if base.weight >= R:
        sol = _to_solution(norm, (), True, flat=flat)
        stats.value, stats.optimal = sol.value, True
        _finish_stats(stats, None, t0, c0)
        return sol, stats
    cc = min_cost_cocircuit(norm.matroid, norm.c)
    if cc is None:
        raise ValueError("target is unreachable: the matroid has rank 0")

    C = cc[1] - 1
    prep = prepare(norm, C, cfg)
    stats.mbar = prep.e_stop
    best = np.array([0, cc[1], 1], dtype=np.int64)
    bestX = np.zeros(norm.m, dtype=np.bool_)
    bestX[list(cc[0])] = True
    stats.root_lb = base.weight
    search = _Search(prep, cfg, True, int(R), best, bestX)
    finished = _drive(search, cfg, t0)
    Xn = [int(x) for x in np.flatnonzero(bestX)]
    sol = _to_solution(norm, Xn, finished, flat=flat, force_inf=bool(best[2]))
    stats.value, stats.optimal = sol.cost, sol.proven_optimal
    _finish_stats(stats, search, t0, c0)
    return sol, stats


def solve_blocker_by_bisection(inst: Instance, R: int, cfg: SolverConfig | None = None) -> Solution:
    """Smallest capacity whose interdiction optimum reaches R, by bisection."""
    norm = ensure_normalized(inst)
    if norm.full_rank is not None and rank(norm.matroid) < norm.full_rank:
        return _to_solution(norm, (), True, force_inf=True)
    if lex_min_basis(norm.matroid, norm.w).weight >= R:
        return _to_solution(norm, (), True)
    cc = min_cost_cocircuit(norm.matroid, norm.c)
    if cc is None:
        raise ValueError("target is unreachable: the matroid has rank 0")
    lo, hi = 0, cc[1]  # value(lo) < R <= value(hi)
    best = None
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        sol, _ = solve_interdiction(norm.with_capacity(mid), cfg)
        if sol.value >= R:
            hi, best = mid, sol
        else:
            lo = mid
    if best is None:
        best, _ = solve_interdiction(norm.with_capacity(hi), cfg)
    return best


def solve_inclusion_interdiction(inst: Instance, cfg: SolverConfig | None = None) -> tuple[Solution, SearchStats]:
    """Leader forces X into the follower's basis; the follower maximises w(Y).

    Solved on the dual matroid: the value is w(E) minus the dual interdiction
    optimum, X carries over unchanged and Y is the complement of the dual basis.
    ``inst`` must be a raw (unnormalized) instance.
    """
    from .matroid import dual
    raw = inst.source if inst.source is not None else inst
    dm = dual(raw.matroid, raw.dual)
    dinst = Instance(dm, raw.w, raw.c, raw.C, inf_cost=raw.inf_cost)
    dsol, stats = solve_interdiction(dinst, cfg)
    total = sum(raw.w)
    if dsol.rank_reducible:
        return Solution(dsol.X, None, -math.inf, dsol.proven_optimal, True, dsol.cost), stats
    Y = tuple(e for e in range(len(raw.w)) if e not in set(dsol.Y))
    return Solution(dsol.X, Y, total - dsol.value, dsol.proven_optimal, False, dsol.cost), stats
