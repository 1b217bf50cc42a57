"""Hypothesis strategies and brute-force oracles shared by the tests."""
from itertools import product

from hypothesis import strategies as st

from symdyn.relation import SymRelation
from symdyn.shiftcore import EPSequence, ShiftGraph


@st.composite
def graphs(draw, min_size=1, max_size=4, density=None):
    n = draw(st.integers(min_size, max_size))
    cells = [(a, b) for a in range(n) for b in range(n)]
    mask = draw(st.lists(st.booleans(), min_size=len(cells), max_size=len(cells)))
    arrows = frozenset(c for c, m in zip(cells, mask) if m)
    return ShiftGraph(tuple(str(i) for i in range(n)), arrows)


@st.composite
def relations(draw, size):
    pairs = [(a, b) for a in range(size) for b in range(a + 1, size)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return SymRelation.from_pairs(size, [p for p, m in zip(pairs, mask) if m])


@st.composite
def ep_sequences(draw, alphabet=3, max_len=4):
    sym = st.integers(0, alphabet - 1)
    left = tuple(draw(st.lists(sym, min_size=1, max_size=max_len)))
    core = tuple(draw(st.lists(sym, max_size=max_len)))
    right = tuple(draw(st.lists(sym, min_size=1, max_size=max_len)))
    start = draw(st.integers(-5, 5))
    return EPSequence(left, core, right, start)


def brute_cycle_words(G: ShiftGraph, n: int) -> set[tuple[int, ...]]:
    """All words of length n that close up into a cycle, by listing all words."""
    out = set()
    for w in product(range(G.size), repeat=n):
        if all(G.has_arrow(w[i], w[(i + 1) % n]) for i in range(n)):
            out.add(w)
    return out


def brute_middle_count(x: EPSequence, G: ShiftGraph, rel: SymRelation, R: int, K: int) -> int:
    """Number of distinct middles ``[-R, R]`` of admissible words on
    ``[-R-K, R+K]`` related to ``x`` there."""
    lo, hi = -R - K, R + K + 1
    allowed = [rel.neighbors(x[n]) for n in range(lo, hi)]
    middles = set()

    def rec(w):
        if len(w) == hi - lo:
            middles.add(tuple(w[K:K + 2 * R + 1]))
            return
        for b in allowed[len(w)]:
            if not w or G.has_arrow(w[-1], b):
                w.append(b)
                rec(w)
                w.pop()

    rec([])
    return len(middles)
