import itertools

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from matint.instances import GenParams, generate_random
from matint.matroid import DirectSum, Instance, Partition, Uniform, graphic

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def triangle(w=(1, 2, 3), c=(1, 1, 1), C=1) -> Instance:
    return Instance(graphic(3, [(0, 1), (1, 2), (0, 2)]), tuple(w), tuple(c), C)


@pytest.fixture
def tri():
    return triangle()


def interdiction_corpus(count=400):
    """The random graphic family of the oracle-equivalence criterion."""
    combos = list(itertools.product([5, 6, 7], [0.5, 1], [1, 10], [2, 100], [0.5, 1]))
    out = []
    for i in range(count):
        n, d, cmax, wmax, g = combos[i % len(combos)]
        out.append(generate_random(GenParams(n, d, g, cmax, wmax, seed=1000 + i)))
    return out


# ---------------------------------------------------------------------------
# hypothesis strategies for small raw instances


@st.composite
def connected_graphs(draw, max_n=5, max_m=8):
    n = draw(st.integers(2, max_n))
    # random spanning tree first, then extra edges (parallel edges and loops allowed)
    edges = [(draw(st.integers(0, v - 1)), v) for v in range(1, n)]
    extra = draw(st.integers(0, max(0, max_m - len(edges))))
    for _ in range(extra):
        edges.append((draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))))
    order = draw(st.permutations(range(len(edges))))
    return graphic(n, [edges[i] for i in order])


@st.composite
def uniform_specs(draw, max_m=7):
    m = draw(st.integers(1, max_m))
    return Uniform(m, draw(st.integers(0, m)))


@st.composite
def partition_specs(draw, max_m=8, max_blocks=3):
    m = draw(st.integers(1, max_m))
    L = draw(st.integers(1, min(max_blocks, m)))
    owner = draw(st.lists(st.integers(0, L - 1), min_size=m, max_size=m))
    owner[:L] = range(L)
    owner = draw(st.permutations(owner))
    blocks = []
    for b in range(L):
        els = tuple(e for e in range(m) if owner[e] == b)
        blocks.append((els, draw(st.integers(0, len(els)))))
    return Partition(tuple(blocks))


@st.composite
def direct_sums(draw):
    parts = draw(st.lists(st.one_of(uniform_specs(4), connected_graphs(3, 4)), min_size=2,
                          max_size=3))
    return DirectSum(tuple(parts))


def matroid_specs(max_m=8):
    return st.one_of(connected_graphs(5, max_m), uniform_specs(max_m), partition_specs(max_m),
                     direct_sums())


@st.composite
def instances(draw, specs=None, max_c=4, max_C=8, zero_cost=False):
    spec = draw(specs if specs is not None else matroid_specs())
    m = spec.size
    w = tuple(draw(st.lists(st.integers(-3, 9), min_size=m, max_size=m)))
    lo = 0 if zero_cost else 1
    c = tuple(draw(st.lists(st.integers(lo, max_c), min_size=m, max_size=m)))
    return Instance(spec, w, c, draw(st.integers(0, max_C)))


def bits(mask: int) -> frozenset:
    return frozenset(i for i in range(64) if (mask >> i) & 1)


def rng(seed=0):
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# acceptance reporting: one PASS/FAIL line per criterion, repeated in the summary

_ACCEPTANCE: list[str] = []


@pytest.fixture
def report():
    def emit(n: int, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {detail}"
        print(line)
        _ACCEPTANCE.append(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
