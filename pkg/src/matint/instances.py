"""Instance files and generators.

File grammar (line oriented, ``#`` starts a comment, vertices are 1-based)::

    mi graphic <m> <C>          mi uniform <m> <C>        mi partition <m> <C>
    graph <n>                   uniform <k>               partition <L>
    e <u> <v> <w> <c>   (m x)   x <w> <c>   (m x)         b <cap> <size>
                                                          x <w> <c>  (size x, per block)
    target <R>                  optional, blocker target
    dual <n>                    optional, graphic planar dual
    e <u> <v>           (m x)   dual edge i corresponds to primal element i

A cost may be the literal ``inf``: the element can never be interdicted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import graph
from .matroid import Graphic, Instance, Partition, Uniform, graphic, normalize


class FormatError(ValueError):
    pass


def inf_sentinel(finite_costs: Sequence[int], C: int) -> int:
    """Stand-in cost for ``inf``: exceeds every budget and every finite cut."""
    return max(sum(finite_costs), C) + 1


def _num(tok: str, lineno: int, scale: int | None, allow_inf: bool = False):
    if allow_inf and tok.lower() == "inf":
        return math.inf
    try:
        if scale is None:
            return int(tok)
        val = Decimal(tok) * scale
    except (ValueError, InvalidOperation):
        raise FormatError(f"line {lineno}: expected an integer, got {tok!r}") from None
    if val != val.to_integral_value():
        raise FormatError(f"line {lineno}: {tok!r} is not integral after scaling by {scale}")
    return int(val)


def parse_text(text: str, scale: int | None = None) -> Instance:
    """Parse an instance; the result is raw (not normalized).

    With ``scale``, decimal numbers are accepted and multiplied by it (weights,
    costs, capacity and target) so that they become integers.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].split()
        if body:
            lines.append((lineno, body))
    pos = 0

    def take(keyword: str, nargs: int) -> tuple[int, list[str]]:
        nonlocal pos
        if pos >= len(lines):
            raise FormatError(f"unexpected end of file, expected '{keyword}'")
        lineno, toks = lines[pos]
        if toks[0] != keyword or len(toks) != nargs + 1:
            raise FormatError(f"line {lineno}: expected '{keyword}' with {nargs} fields, "
                              f"got {' '.join(toks)!r}")
        pos += 1
        return lineno, toks[1:]

    ln, (variant, m_tok, C_tok) = take("mi", 3)
    m = _num(m_tok, ln, None)
    C = _num(C_tok, ln, scale)
    w: list[int] = []
    c: list[float] = []
    if variant == "graphic":
        ln, (n_tok,) = take("graph", 1)
        n = _num(n_tok, ln, None)
        edges = []
        for _ in range(m):
            ln, (u, v, wt, ct) = take("e", 4)
            uu, vv = _num(u, ln, None), _num(v, ln, None)
            if not (1 <= uu <= n and 1 <= vv <= n):
                raise FormatError(f"line {ln}: vertex outside 1..{n}")
            edges.append((uu - 1, vv - 1))
            w.append(_num(wt, ln, scale))
            c.append(_num(ct, ln, scale, allow_inf=True))
        spec = graphic(n, edges)
    elif variant == "uniform":
        ln, (k_tok,) = take("uniform", 1)
        k = _num(k_tok, ln, None)
        for _ in range(m):
            ln, (wt, ct) = take("x", 2)
            w.append(_num(wt, ln, scale))
            c.append(_num(ct, ln, scale, allow_inf=True))
        spec = Uniform(m, k)
    elif variant == "partition":
        ln, (L_tok,) = take("partition", 1)
        blocks = []
        for _ in range(_num(L_tok, ln, None)):
            ln, (cap_tok, size_tok) = take("b", 2)
            size = _num(size_tok, ln, None)
            els = tuple(range(len(w), len(w) + size))
            blocks.append((els, _num(cap_tok, ln, None)))
            for _ in range(size):
                ln, (wt, ct) = take("x", 2)
                w.append(_num(wt, ln, scale))
                c.append(_num(ct, ln, scale, allow_inf=True))
        if len(w) != m:
            raise FormatError(f"partition blocks hold {len(w)} elements, header says {m}")
        spec = Partition(tuple(blocks))
    else:
        raise FormatError(f"line {ln}: unknown variant {variant!r}")

    target = None
    dual = None
    while pos < len(lines):
        lineno, toks = lines[pos]
        if toks[0] == "target" and len(toks) == 2:
            pos += 1
            target = _num(toks[1], lineno, scale)
        elif toks[0] == "dual" and len(toks) == 2:
            pos += 1
            dn = _num(toks[1], lineno, None)
            dedges = []
            for _ in range(m):
                ln, (u, v) = take("e", 2)
                dedges.append((_num(u, ln, None) - 1, _num(v, ln, None) - 1))
            dual = graphic(dn, dedges)
        else:
            raise FormatError(f"line {lineno}: unexpected {' '.join(toks)!r}")

    finite = [int(x) for x in c if not math.isinf(x)]
    if any(x < 0 for x in finite) or C < 0:
        raise FormatError("costs and capacity must be non-negative")
    sentinel = inf_sentinel(finite, C) if len(finite) < len(c) else None
    cost = tuple(sentinel if math.isinf(x) else int(x) for x in c)
    return Instance(spec, tuple(w), cost, C, target=target, dual=dual, inf_cost=sentinel)


def parse(path, scale: int | None = None) -> Instance:
    """Read and normalize an instance file (the raw form stays in ``.source``)."""
    try:
        return normalize(parse_text(Path(path).read_text(), scale))
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: {exc}") from exc


def serialize_text(inst: Instance) -> str:
    raw = inst.source if inst.source is not None else inst
    spec = raw.matroid

    def cost(x: int) -> str:
        return "inf" if raw.inf_cost is not None and x == raw.inf_cost else str(x)

    out = []
    if isinstance(spec, Graphic):
        out.append(f"mi graphic {spec.size} {raw.C}")
        out.append(f"graph {spec.n}")
        for (u, v), wt, ct in zip(spec.edges, raw.w, raw.c):
            out.append(f"e {u + 1} {v + 1} {wt} {cost(ct)}")
    elif isinstance(spec, Uniform):
        out.append(f"mi uniform {spec.m} {raw.C}")
        out.append(f"uniform {spec.k}")
        out.extend(f"x {wt} {cost(ct)}" for wt, ct in zip(raw.w, raw.c))
    elif isinstance(spec, Partition):
        # blocks are written in order; the file format numbers elements block by block
        out.append(f"mi partition {spec.size} {raw.C}")
        out.append(f"partition {len(spec.blocks)}")
        for els, cap in spec.blocks:
            out.append(f"b {cap} {len(els)}")
            out.extend(f"x {raw.w[e]} {cost(raw.c[e])}" for e in els)
    else:
        raise FormatError(f"no file format for {type(spec).__name__}")
    if raw.target is not None:
        out.append(f"target {raw.target}")
    if raw.dual is not None:
        out.append(f"dual {raw.dual.n}")
        out.extend(f"e {u + 1} {v + 1}" for u, v in raw.dual.edges)
    return "\n".join(out) + "\n"


def serialize(inst: Instance, path) -> None:
    Path(path).write_text(serialize_text(inst))


# ---------------------------------------------------------------------------
# Generators


@dataclass(frozen=True)
class GenParams:
    n: int
    d: float
    gamma: float
    c_max: int
    w_max: int
    seed: int = 0


def _connected(n: int, edges) -> bool:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    comps = n
    for u, v in edges:
        a, b = find(u), find(v)
        if a != b:
            parent[a] = b
            comps -= 1
    return comps == 1


def generate_random(params: GenParams, max_tries: int = 10_000) -> Instance:
    """Random simple connected graph with uniform weights/costs (raw instance).

    m = floor(d * n(n-1)/2); edge sets are redrawn until connected.  The
    capacity is floor(gamma * (global min cut cost - 1)).
    """
    n = params.n
    if n < 2:
        raise ValueError("need n >= 2")
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    m = math.floor(Fraction(str(params.d)) * len(pairs))
    if m < n - 1:
        raise ValueError(f"{m} edges cannot connect {n} vertices")
    rng = np.random.default_rng(params.seed)
    for tries in range(max_tries):
        pick = np.sort(rng.choice(len(pairs), size=m, replace=False))
        edges = [pairs[i] for i in pick]
        if _connected(n, edges):
            break
    else:
        raise RuntimeError("could not draw a connected graph")
    w = tuple(int(x) for x in rng.integers(1, params.w_max, size=m, endpoint=True))
    c = tuple(int(x) for x in rng.integers(1, params.c_max, size=m, endpoint=True))
    mcut, _ = graph.global_min_cut(graph.Multigraph(n, tuple(edges)), c)
    C = math.floor(Fraction(str(params.gamma)) * (int(mcut) - 1))
    return Instance(graphic(n, edges), w, c, max(C, 0),
                    meta={"resamples": tries, "mincut": int(mcut), "params": params})


def generate_comb(k: int, M: int) -> Instance:
    """Chain of k gadgets; gadget t is three parallel edges between t and t+1
    with (weight, cost) = (0, k-1), (1, 1), (M, inf).  Capacity 2k-1.

    Forcing the heavy edge of a gadget costs k, so the optimum forces one
    gadget to M and one more to 1: value M+1.
    """
    if k < 2 or M < 2:
        raise ValueError("need k >= 2 and M >= 2")
    edges, w, c = [], [], []
    finite = []
    for t in range(k):
        for wt, ct in ((0, k - 1), (1, 1), (M, None)):
            edges.append((t, t + 1))
            w.append(wt)
            c.append(ct)
            if ct is not None:
                finite.append(ct)
    C = 2 * k - 1
    sentinel = inf_sentinel(finite, C)
    cost = tuple(sentinel if x is None else x for x in c)
    return Instance(graphic(k + 1, edges), tuple(w), cost, C, inf_cost=sentinel)


def generate_knapsack_reduction(a: Sequence[int], p: Sequence[int], C: int) -> Instance:
    """Uniform matroid of rank n on 2n elements whose interdiction gain is the
    0-1 knapsack optimum for item sizes a, profits p and capacity C."""
    n = len(a)
    if len(p) != n:
        raise ValueError("sizes and profits differ in length")
    pmax = max(p, default=0)
    w = tuple(pmax - x for x in p) + (pmax,) * n
    c = tuple(int(x) for x in a) + (C + 1,) * n
    return Instance(Uniform(2 * n, n), w, c, C)


def generate_greedy_trap(M: int) -> Instance:
    """Four-vertex instance (capacity 2) where the greedy bound reaches 4 but
    the optimum is M+2.

    Vertices A..D; (weight, cost): AB (0,1), BC (0,1), AC (1,inf), CD (1,2),
    AD (4,inf), BD (M,inf).  Greedy spends the whole budget on CD.
    """
    if M < 3:
        raise ValueError("need M >= 3")
    A, B, Cv, D = range(4)
    spec = [((A, B), 0, 1), ((B, Cv), 0, 1), ((A, Cv), 1, None), ((Cv, D), 1, 2),
            ((A, D), 4, None), ((B, D), M, None)]
    finite = [ct for _, _, ct in spec if ct is not None]
    sentinel = inf_sentinel(finite, 2)
    return Instance(graphic(4, [e for e, _, _ in spec]), tuple(wt for _, wt, _ in spec),
                    tuple(sentinel if ct is None else ct for _, _, ct in spec), 2,
                    inf_cost=sentinel)


def random_uniform(rng: np.random.Generator, m_max: int = 12, C_max: int = 30,
                   c_max: int = 10, w_max: int = 20) -> Instance:
    m = int(rng.integers(1, m_max, endpoint=True))
    k = int(rng.integers(1, m, endpoint=True))
    w = tuple(int(x) for x in rng.integers(-w_max // 4, w_max, size=m, endpoint=True))
    c = tuple(int(x) for x in rng.integers(1, c_max, size=m, endpoint=True))
    return Instance(Uniform(m, k), w, c, int(rng.integers(0, C_max, endpoint=True)))


def random_partition(rng: np.random.Generator, m_max: int = 12, L_max: int = 4,
                     C_max: int = 30, c_max: int = 10, w_max: int = 20) -> Instance:
    L = int(rng.integers(1, L_max, endpoint=True))
    m = int(rng.integers(L, max(L, m_max), endpoint=True))
    owner = list(range(L)) + [int(x) for x in rng.integers(0, L, size=m - L)]
    rng.shuffle(owner)
    blocks = []
    for b in range(L):
        els = tuple(e for e in range(m) if owner[e] == b)
        blocks.append((els, int(rng.integers(0, len(els), endpoint=True))))
    w = tuple(int(x) for x in rng.integers(-w_max // 4, w_max, size=m, endpoint=True))
    c = tuple(int(x) for x in rng.integers(1, c_max, size=m, endpoint=True))
    return Instance(Partition(tuple(blocks)), w, c, int(rng.integers(0, C_max, endpoint=True)))
