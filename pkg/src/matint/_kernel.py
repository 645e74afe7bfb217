"""Compiled core of the search: the undoable interdiction state and the
depth-first branch-and-bound driven as an explicit-stack state machine.

All mutable state lives in numpy arrays owned by ``search.DynInterdict``:

    sc[ULOG]    top of the add-undo log
    sc[CUR]     cursor (next undecided basis element, m when none is left)
    sc[XTOP]    depth of the interdiction stack
    sc[COST]    c(X)
    sc[WY]      w(Y)
    sc[STATE]   bound state of X
    sc[XMASK]   bit pattern of X restricted to elements < 62
    sc[DEPTH]   depth of the suspended search frame stack

Undo log codes: >= 0 is a union-find root that was attached, -1 a no-op
union, <= -2 a block counter increment of block -(code + 2).
"""
from __future__ import annotations

import numpy as np
from numba import njit

ULOG, CUR, XTOP, COST, WY, STATE, XMASK, DEPTH = range(8)
N_SCALARS = 8
MASK_BITS = 62

INF = np.int64(2**60)

DONE, EXHAUSTED, RANK_REDUCIBLE = 0, 1, 3

# stats slots
S_NODES, S_PRUNES, S_UPDATES, S_VISITS, S_TRACE = range(5)


@njit(cache=True, nogil=True)
def uf_find(parent, a):
    while parent[a] != a:
        a = parent[a]
    return a


@njit(cache=True, nogil=True)
def can_add(e, eu, ev, eblk, bcap, parent, bcnt):
    b = eblk[e]
    if b >= 0:
        return bcnt[b] < bcap[b]
    return uf_find(parent, eu[e]) != uf_find(parent, ev[e])


@njit(cache=True, nogil=True)
def add(e, eu, ev, eblk, parent, usize, bcnt, ulog, sc):
    b = eblk[e]
    top = sc[ULOG]
    if b >= 0:
        bcnt[b] += 1
        ulog[top] = -(b + 2)
    else:
        ra = uf_find(parent, eu[e])
        rb = uf_find(parent, ev[e])
        if ra == rb:
            ulog[top] = -1
        else:
            if usize[ra] > usize[rb]:
                ra, rb = rb, ra
            parent[ra] = rb
            usize[rb] += usize[ra]
            ulog[top] = ra
    sc[ULOG] = top + 1


@njit(cache=True, nogil=True)
def undo_add(parent, usize, bcnt, ulog, sc):
    top = sc[ULOG] - 1
    code = ulog[top]
    if code >= 0:
        rb = parent[code]
        usize[rb] -= usize[code]
        parent[code] = code
    elif code <= -2:
        bcnt[-(code + 2)] -= 1
    sc[ULOG] = top


# Fenwick tree over basis membership gives ordered-set next/prev in O(log m).

@njit(cache=True, nogil=True)
def fen_add(fen, i, d):
    i += 1
    n = len(fen) - 1
    while i <= n:
        fen[i] += d
        i += i & -i


@njit(cache=True, nogil=True)
def fen_prefix(fen, i):
    """Number of members in [0, i)."""
    s = 0
    while i > 0:
        s += fen[i]
        i -= i & -i
    return s


@njit(cache=True, nogil=True)
def fen_kth(fen, k):
    """Index of the k-th member (1-based k); len(fen)-1 if there is none."""
    n = len(fen) - 1
    pos = 0
    step = 1
    while step * 2 <= n:
        step *= 2
    while step > 0:
        nxt = pos + step
        if nxt <= n and fen[nxt] < k:
            pos = nxt
            k -= fen[nxt]
        step //= 2
    return pos


@njit(cache=True, nogil=True)
def next_member(fen, i):
    return fen_kth(fen, fen_prefix(fen, i) + 1)


@njit(cache=True, nogil=True)
def prev_member(fen, i):
    k = fen_prefix(fen, i)
    if k == 0:
        return -1
    return fen_kth(fen, k)


@njit(cache=True, nogil=True)
def dyn_skip(eu, ev, eblk, parent, usize, bcnt, ulog, fen, sc):
    e = sc[CUR]
    add(e, eu, ev, eblk, parent, usize, bcnt, ulog, sc)
    sc[CUR] = next_member(fen, e + 1)


@njit(cache=True, nogil=True)
def dyn_unskip(parent, usize, bcnt, ulog, fen, sc):
    sc[CUR] = prev_member(fen, sc[CUR])
    undo_add(parent, usize, bcnt, ulog, sc)


@njit(cache=True, nogil=True)
def dyn_interdict(eu, ev, eblk, bcap, w, c, parent, usize, bcnt, ulog, fen, inY, inX,
                  xe, xf, sstack, pi, sc):
    """Interdict the cursor element; False (state untouched) if it has no replacement."""
    m = len(eu)
    e = sc[CUR]
    added = 0
    f = e + 1
    found = -1
    while f < m:
        if inY[f]:
            add(f, eu, ev, eblk, parent, usize, bcnt, ulog, sc)
            added += 1
        elif can_add(f, eu, ev, eblk, bcap, parent, bcnt):
            found = f
            break
        f += 1
    for _ in range(added):
        undo_add(parent, usize, bcnt, ulog, sc)
    if found < 0:
        return False
    inY[e] = False
    fen_add(fen, e, -1)
    inY[found] = True
    fen_add(fen, found, 1)
    inX[e] = True
    top = sc[XTOP]
    xe[top] = e
    xf[top] = found
    sstack[top] = sc[STATE]
    sc[XTOP] = top + 1
    sc[WY] += w[found] - w[e]
    sc[COST] += c[e]
    sc[STATE] = pi[e, sc[STATE]]
    if e < MASK_BITS:
        sc[XMASK] |= np.int64(1) << e
    sc[CUR] = next_member(fen, e + 1)
    return True


@njit(cache=True, nogil=True)
def dyn_uninterdict(w, c, fen, inY, inX, xe, xf, sstack, sc):
    top = sc[XTOP] - 1
    e = xe[top]
    f = xf[top]
    inY[f] = False
    fen_add(fen, f, -1)
    inY[e] = True
    fen_add(fen, e, 1)
    inX[e] = False
    sc[XTOP] = top
    sc[WY] -= w[f] - w[e]
    sc[COST] -= c[e]
    sc[STATE] = sstack[top]
    if e < MASK_BITS:
        sc[XMASK] &= ~(np.int64(1) << e)
    sc[CUR] = e


@njit(cache=True, nogil=True)
def run(eu, ev, eblk, bcap, w, c, parent, usize, bcnt, ulog, fen, inY, inX,
        xe, xf, sstack, pi, sc, frames,
        blocker, C, target, allowed, e_stop, sufmin,
        ftab, have_bound, p, K, Cr,
        best, bestX, stats, budget, visit_log, trace):
    """Advance the depth-first search by at most ``budget`` nodes.

    Interdiction mode maximises w(Y) subject to c(X) <= C.  Blocker mode
    minimises c(X) subject to w(Y) >= target; ``best[1]`` holds the incumbent
    cost and ``best[2]`` is 1 while the incumbent is still the cocircuit.
    Returns DONE, EXHAUSTED (resume by calling again) or RANK_REDUCIBLE, in
    which case bestX is the witness.
    """
    m = len(eu)
    d = sc[DEPTH]
    pmask = (np.int64(1) << p) - 1
    spent = 0
    while d >= 0:
        stage = frames[d]
        if stage == 0:
            if spent >= budget:
                sc[DEPTH] = d
                return EXHAUSTED
            spent += 1
            stats[S_NODES] += 1
            if stats[S_VISITS] < len(visit_log):
                visit_log[stats[S_VISITS]] = sc[XMASK]
                stats[S_VISITS] += 1
            e = sc[CUR]
            cost = sc[COST]
            wy = sc[WY]
            leaf = False
            if not blocker:
                if wy > best[0]:
                    best[0] = wy
                    best[1] = cost
                    for x in range(m):
                        bestX[x] = inX[x]
                    stats[S_UPDATES] += 1
                    if stats[S_TRACE] < len(trace):
                        trace[stats[S_TRACE]] = wy
                        stats[S_TRACE] += 1
                if e >= e_stop or sufmin[e] > C - cost:
                    leaf = True
                elif have_bound:
                    rr = (C - cost) // K
                    if rr > Cr:
                        rr = Cr
                    fv = ftab[e, sc[XMASK] & pmask, sc[STATE], rr]
                    if fv < INF and fv + wy <= best[0]:
                        stats[S_PRUNES] += 1
                        leaf = True
            else:
                if wy >= target and (cost < best[1] or (cost == best[1] and best[2] == 1)):
                    best[0] = wy
                    best[1] = cost
                    best[2] = 0
                    for x in range(m):
                        bestX[x] = inX[x]
                    stats[S_UPDATES] += 1
                    if stats[S_TRACE] < len(trace):
                        trace[stats[S_TRACE]] = cost
                        stats[S_TRACE] += 1
                if e >= e_stop or wy >= target or cost >= best[1] \
                        or sufmin[e] > best[1] - 1 - cost:
                    leaf = True
                elif have_bound:
                    rr = (best[1] - 1 - cost) // K
                    if rr > Cr:
                        rr = Cr
                    fv = ftab[e, sc[XMASK] & pmask, sc[STATE], rr]
                    if fv < INF and fv + wy < target:
                        stats[S_PRUNES] += 1
                        leaf = True
            if leaf:
                d -= 1
                continue
            if allowed[e]:
                if blocker:
                    fits = cost + c[e] <= best[1]
                else:
                    fits = c[e] <= C - cost
                if fits:
                    if dyn_interdict(eu, ev, eblk, bcap, w, c, parent, usize, bcnt, ulog, fen,
                                     inY, inX, xe, xf, sstack, pi, sc):
                        frames[d] = 1
                        d += 1
                        frames[d] = 0
                        continue
                    if not blocker:
                        for x in range(m):
                            bestX[x] = inX[x]
                        bestX[e] = True
                        sc[DEPTH] = d
                        return RANK_REDUCIBLE
            dyn_skip(eu, ev, eblk, parent, usize, bcnt, ulog, fen, sc)
            frames[d] = 3
            d += 1
            frames[d] = 0
        elif stage == 1:
            dyn_uninterdict(w, c, fen, inY, inX, xe, xf, sstack, sc)
            dyn_skip(eu, ev, eblk, parent, usize, bcnt, ulog, fen, sc)
            frames[d] = 3
            d += 1
            frames[d] = 0
        else:
            dyn_unskip(parent, usize, bcnt, ulog, fen, sc)
            d -= 1
    sc[DEPTH] = -1
    return DONE
