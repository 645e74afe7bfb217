import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from matint import bounds
from matint.graph import Multigraph, min_st_cut
from matint.instances import generate_comb, generate_knapsack_reduction, generate_random, GenParams
from matint.matroid import DirectSum, Instance, Uniform, graphic, lex_min_basis, normalize
from matint.oracle import brute_force_interdiction, knapsack_dp, min_basis_weight
from matint.search import rank_reducer_within_budget

from conftest import connected_graphs, instances, partition_specs, triangle, uniform_specs


def F(norm, X):
    return min_basis_weight(norm.matroid, norm.w, X, norm.full_rank)


def table_for(norm, p=0, K=1):
    space = bounds.statespace(norm, K)
    return space, bounds.build_table(norm, space, p, K)


def test_uniform_delta_examples():
    sp = bounds.statespace_uniform(2, 4, [1, 2, 3, 4])
    assert sp.delta(0, 0, 0) == 2  # w_3 - w_1
    assert sp.delta(2, 0, 0) == 0  # k + n < i
    assert sp.delta(0, 0, 1) == 3  # one earlier removal: w_4 - w_1
    assert sp.delta(1, 0, 2) == bounds.INF  # k + n reaches m
    full = bounds.statespace_uniform(4, 4, [1, 2, 3, 4])
    assert full.delta(0, 0, 0) == bounds.INF


def test_uniform_delta_matches_enumeration():
    w = [1, 2, 3, 4]
    inst = normalize(Instance(Uniform(4, 2), tuple(w), (1,) * 4, 4))
    sp = bounds.statespace(inst)
    for i in range(4):
        for P in itertools.chain.from_iterable(itertools.combinations(range(i), k) for k in range(i + 1)):
            before, after = F(inst, P), F(inst, set(P) | {i})
            if math.isinf(before):
                continue
            d = sp.delta(i, 0, sp.phi(P))
            if math.isinf(after):
                assert d == bounds.INF
            else:
                assert d == after - before


def test_direct_sum_state_space():
    a = bounds.statespace_uniform(2, 3, [1, 2, 3])
    b = bounds.statespace_uniform(1, 2, [5, 6])
    s = bounds.statespace_direct_sum(a, b)
    assert s.n_states == a.n_states + b.n_states
    # interdicting only elements of the first part keeps the state in its range
    for X in [(0,), (0, 1), (1, 2), (0, 1, 2)]:
        assert 0 <= s.phi(X) < a.n_states
    # a state of the first part is read as the second part's empty state
    assert s.delta(3, 0, s.phi((0, 1))) == s.delta(3, 0, s.phi(()))
    assert s.phi((0, 3)) == a.n_states + 1


def test_graphic_delta_examples():
    d = bounds.delta_graphic(normalize(triangle(C=1)))
    assert d[0, 1] == 2  # interdicting e1 forces e3 in
    bridge = normalize(Instance(graphic(2, [(0, 1)]), (1,), (1,), 1))
    assert bounds.delta_graphic(bridge)[0].tolist() == [bounds.INF, bounds.INF]
    # prefix cut of cost 2 cannot be paid from C - r = 0: the edge is not in the basis
    four = normalize(Instance(graphic(3, [(0, 1), (0, 2), (1, 2), (1, 2)]), (1, 1, 2, 9),
                              (1, 1, 1, 1), 2))
    assert bounds.delta_graphic(four)[2, 2] == 0


def reference_graphic_delta(norm, C):
    """Graphic delta rows with every cut computed from scratch."""
    g = norm.matroid
    m = norm.m
    out = np.full((m, C + 1), bounds.INF, dtype=np.int64)
    for i in range(m):
        u, v = g.edges[i]
        if u == v:
            out[i] = 0
            continue
        for j in range(i + 1, m):
            sub = Multigraph(g.n, tuple(g.edges[i + 1:j + 1]))
            if min_st_cut(sub, [1] * len(sub.edges), u, v)[0] > 0:
                out[i] = norm.w[j] - norm.w[i]
                break

        def cut(upto):
            edges = g.edges[:i] + g.edges[i + 1:upto]
            cap = [norm.c[j] if norm.c[j] <= C else math.inf for j in range(i)]
            cap += [math.inf] * (upto - i - 1)
            return min_st_cut(Multigraph(g.n, tuple(edges)), cap, u, v)[0] if edges else 0

        x = cut(i + 1)
        for r in range(C + 1):
            if r >= C - x + 1:
                out[i, r] = 0
        for j in range(i + 1, m):
            x = cut(j + 1)
            for r in range(C + 1):
                if r >= C - x + 1:
                    out[i, r] = min(out[i, r], norm.w[j] - norm.w[i])
            if x > C:
                break
    return out


@given(instances(specs=connected_graphs(5, 8), max_C=6))
def test_incremental_cuts_match_from_scratch(inst):
    norm = normalize(inst)
    assert np.array_equal(bounds.delta_graphic(norm), reference_graphic_delta(norm, norm.C))


def _feasible_sets(norm):
    for k in range(norm.m + 1):
        for X in itertools.combinations(range(norm.m), k):
            if sum(norm.c[x] for x in X) <= norm.C:
                yield X


def _check_soundness(norm, p, K=1):
    space, table = table_for(norm, p, K)
    feas = list(_feasible_sets(norm))
    cost, Cr = bounds._bound_costs(norm, K)
    for Xh in feas:
        for i in range(norm.m + 1):
            P = tuple(x for x in Xh if x < i)
            comp = [X for X in feas if tuple(x for x in X if x < i) == P]
            need = max(F(norm, X) - F(norm, P) for X in comp)
            s = space.phi(P)
            mask = sum(1 << x for x in P if x < p)
            rr = min(Cr, (norm.C - sum(norm.c[x] for x in P)) // K)
            assert table.query(i, rr, s, mask) >= need


@given(instances(max_c=3, max_C=5).filter(lambda x: x.matroid.size <= 7))
def test_table_is_sound(inst):
    norm = normalize(inst)
    if rank_reducer_within_budget(norm) is not None:
        return
    _check_soundness(norm, 0)


@given(instances(specs=connected_graphs(4, 6), max_c=3, max_C=5), st.integers(1, 3),
       st.integers(1, 2))
def test_strengthened_and_rounded_tables_are_sound(inst, p, K):
    norm = normalize(inst)
    if rank_reducer_within_budget(norm) is not None:
        return
    _check_soundness(norm, min(p, norm.m), K)


@given(instances(max_C=6))
def test_table_recursion(inst):
    norm = normalize(inst)
    space, table = table_for(norm)
    f = table.values
    assert not f[norm.m].any()
    for i in range(norm.m):
        for s in range(space.n_states):
            for r in range(norm.C + 1):
                skip = f[i + 1, 0, s, r]
                if norm.c[i] > r:
                    assert f[i, 0, s, r] == skip
                else:
                    d = space.delta(i, r, s)
                    nxt = f[i + 1, 0, space.pi[i, s], r - norm.c[i]]
                    take = min(bounds.INF, d + nxt) if max(d, nxt) < bounds.INF else bounds.INF
                    assert f[i, 0, s, r] == max(skip, take)


def test_knapsack_reduction_table_equals_knapsack_dp():
    a, p, C = [3, 4, 5, 2], [4, 5, 7, 1], 9
    norm = normalize(generate_knapsack_reduction(a, p, C))
    _, table = table_for(norm)
    assert table.query(0, C, 0) == knapsack_dp(a, p, C) == 12


def test_prefix_bits_never_weaken():
    for seed in range(6):
        norm = normalize(generate_random(GenParams(6, 1, 1, 10, 50, seed)))
        if rank_reducer_within_budget(norm) is not None:
            continue
        space = bounds.statespace(norm)
        f0 = bounds.build_table(norm, space, 0).query(0, norm.C, 0)
        for p in (1, 2, 4):
            assert bounds.build_table(norm, space, p).query(0, norm.C, 0) <= f0


@pytest.mark.parametrize("k,M", [(2, 5), (3, 10)])
def test_comb_gap(k, M):
    norm = normalize(generate_comb(k, M))
    _, table = table_for(norm)
    assert bounds.root_bound(norm, table, 0) >= k * (M - 1) + 1
    assert brute_force_interdiction(norm).value == M + 1


def test_round_costs_examples():
    inst = Instance(Uniform(2, 1), (1, 2), (10, 19), 20)
    assert bounds.round_costs(inst, 1).c == inst.c
    r = bounds.round_costs(inst, 10)
    assert r.c == (1, 1) and r.C == 2


def test_rounded_bound_dominates():
    for seed in range(8):
        norm = normalize(generate_random(GenParams(6, 1, 1, 10, 50, seed)))
        if rank_reducer_within_budget(norm) is not None:
            continue
        F0 = F(norm, ())
        opt = brute_force_interdiction(norm).value
        plain = bounds.root_bound(norm, table_for(norm, 0, 1)[1], F0)
        rounded = bounds.root_bound(norm, table_for(norm, 0, 3)[1], F0)
        assert rounded >= plain >= opt


@given(instances(specs=st.one_of(uniform_specs(8), partition_specs(8)), max_C=10))
def test_counter_state_spaces_are_exact(inst):
    norm = normalize(inst)
    if rank_reducer_within_budget(norm) is not None:
        return
    _, table = table_for(norm)
    assert bounds.root_bound(norm, table, F(norm, ())) == brute_force_interdiction(norm).value


def test_rank_reducible_root_is_infinite():
    norm = normalize(triangle(C=2))
    assert math.isinf(bounds.root_bound(norm, table_for(norm)[1], 3))


def test_memory_budget_refusal():
    norm = normalize(triangle())
    with pytest.raises(bounds.MemoryBudgetExceeded):
        bounds.build_table(norm, bounds.statespace(norm), 2, mem_limit=16)


def test_dump_load_round_trip(tmp_path):
    norm = normalize(triangle(C=2))
    _, table = table_for(norm, 1)
    path = tmp_path / "t.bin"
    bounds.dump(table, path, norm.m, norm.C)
    raw = path.read_bytes()
    assert raw[:5] == b"MIBT1"
    back = bounds.load(path)
    assert back.p == 1 and back.K == 1 and np.array_equal(back.values, table.values)
    assert np.iinfo(np.int64).max.to_bytes(8, "little") in raw


@given(instances(specs=st.one_of(uniform_specs(8), partition_specs(8)), max_C=8))
def test_counter_tables_monotone_in_budget(inst):
    norm = normalize(inst)
    _, table = table_for(norm)
    assert (np.diff(table.values, axis=3) >= 0).all()
