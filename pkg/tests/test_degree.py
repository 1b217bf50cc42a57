import pytest
from hypothesis import assume, given, strategies as st

from strategies import graphs, relations
from symdyn import fixtures as fx
from symdyn.degree import (
    block_decomposition,
    class_size_lower_bound,
    concat_transitions,
    exhaustive_degree,
    is_magic,
    is_special,
    local_degrees,
    magic_couple,
    rec_degree,
    sees_magic,
    shortest_magic_subword,
    transitions,
    verify_thm_degree,
    word_degree,
)
from symdyn.relation import class_of
from symdyn.shiftcore import (
    EPSequence,
    InputError,
    ShiftGraph,
    essential_symbols,
    heteroclinic_points,
    in_recurrent_language,
    iter_cycle_words,
)


def brute_word_degree(w, i, G, rel, ess):
    """Symbols at index i among admissible essential words related to w."""
    out = set()

    def rec(v):
        if len(v) == len(w):
            out.add(v[i])
            return
        for b in rel.neighbors(w[len(v)]):
            if b in ess and (not v or G.has_arrow(v[-1], b)):
                rec(v + (b,))

    rec(())
    return len(out)


def test_zero_one_two_degree():
    f = fx.zero_one_two()
    rep = rec_degree(f.source, f.relation)
    assert rep.degree == 1
    assert rep.word == (f.source.symbol("1"),)


@pytest.mark.parametrize("name,d", [("two_copy", 2), ("mixed_fiber", 1), ("cyclic4", 4),
                                    ("cyclic_parity", 2), ("bad_regular", 6), ("identity_golden", 1)])
def test_fixture_degrees(name, d):
    f = fx.FIXTURES[name]()
    rep = rec_degree(f.source, f.relation)
    assert rep.degree == d
    assert is_magic(rep.word, f.source, f.relation, d)


@given(graphs(max_size=4), st.data())
def test_word_degree_oracle(G, data):
    ess = essential_symbols(G)
    assume(ess)
    rel = data.draw(relations(G.size))
    n = data.draw(st.integers(1, 4))
    w = tuple(data.draw(st.lists(st.sampled_from(sorted(ess)), min_size=n, max_size=n)))
    assume(all(G.has_arrow(a, b) for a, b in zip(w, w[1:])))
    for i in range(n):
        assert word_degree(w, i, G, rel, ess) == brute_word_degree(w, i, G, rel, ess)


@given(graphs(max_size=4), st.data())
def test_automaton_matches_exhaustive_search(G, data):
    assume(essential_symbols(G))
    rel = data.draw(relations(G.size))
    rep = rec_degree(G, rel)
    assert exhaustive_degree(G, rel, rep.search_bound) == rep.degree
    assert exhaustive_degree(G, rel, rep.search_bound + 2) == rep.degree


def test_degree_needs_recurrent_words():
    G = ShiftGraph.from_labels("ab", [("a", "b")])
    with pytest.raises(InputError):
        rec_degree(G, fx.SymRelation.equality(2))


def test_local_degrees_and_magic_subwords():
    f = fx.zero_one_two()
    G, rel = f.source, f.relation
    x = EPSequence.periodic(G.word("10"))
    assert min(local_degrees(x, G, rel)) == 1
    assert sees_magic(x, G, rel, 1)
    w, i = shortest_magic_subword(x, G, rel, 1)
    assert w == G.word("1")
    assert not sees_magic(EPSequence.periodic(G.word("0")), G, rel, 1)


# -- transitions -------------------------------------------------------------------


def brute_transitions(mc, u, i, j, G, rel):
    W, I = mc.word, mc.index
    full = tuple(W) + tuple(u) + tuple(W)
    span = len(W) + len(u)
    ess = essential_symbols(G)
    out = set()

    def rec(v):
        if len(v) == len(full):
            if v[I] == mc.symbols[i] and v[I + span] == mc.symbols[j]:
                out.add(v[I:I + span])
            return
        for b in rel.neighbors(full[len(v)]):
            if b in ess and (not v or G.has_arrow(v[-1], b)):
                rec(v + (b,))

    rec(())
    return out


@pytest.mark.parametrize("name", ["two_copy", "cyclic_parity", "bad_regular"])
def test_transitions_oracle(name):
    f = fx.FIXTURES[name]()
    G, rel = f.source, f.relation
    rep = rec_degree(G, rel)
    mc = magic_couple(rep.word, rep.index, G, rel)
    assert mc.d == rep.degree
    fillers = [u for n in range(0, 4) for u in _words(G, n)
               if in_recurrent_language(mc.word + u + mc.word, G)]
    assert fillers
    for u in fillers[:25]:
        for i in range(mc.d):
            for j in range(mc.d):
                assert transitions(mc, u, i, j, G, rel) == brute_transitions(mc, u, i, j, G, rel)


def _words(G, n):
    if n == 0:
        return [()]
    return [w + (b,) for w in _words(G, n - 1) for b in range(G.size) if not w or G.has_arrow(w[-1], b)]


def test_concatenation_claim():
    f = fx.bad_regular()
    G, rel = f.source, f.relation
    rep = rec_degree(G, rel)
    mc = magic_couple(rep.word, rep.index, G, rel)
    W = mc.word
    fillers = [u for n in range(0, 3) for u in _words(G, n) if in_recurrent_language(W + u + W, G)]
    for u in fillers[:6]:
        for v in fillers[:6]:
            if not in_recurrent_language(W + u + W + v + W, G):
                continue
            for i in range(mc.d):
                for j in range(mc.d):
                    joined = set()
                    for k in range(mc.d):
                        joined |= concat_transitions(transitions(mc, u, i, k, G, rel),
                                                     transitions(mc, v, k, j, G, rel))
                    assert transitions(mc, u + W + v, i, j, G, rel) == joined


def test_special_filler_and_lower_bound():
    f = fx.zero_one_two()
    G, rel = f.source, f.relation
    mc = magic_couple(G.word("1"), 0, G, rel)
    assert is_special(G.word("0"), mc, G, rel)
    assert not is_special((), mc, G, rel)
    x = EPSequence.periodic(G.word("10"))
    assert block_decomposition(x, mc.word) == [G.word("0")]
    assert class_size_lower_bound(x, mc, G, rel) == float("inf")
    assert not class_of(x, G, rel).finite


@pytest.mark.parametrize("name", ["two_copy", "mixed_fiber", "cyclic4", "cyclic_parity", "bad_regular",
                                  "twisted_two_copy"])
def test_theorem_check_on_fixtures(name):
    f = fx.FIXTURES[name]()
    check = verify_thm_degree(f.source, f.relation, 6)
    assert check.passed
    assert check.min_class == check.degree


def test_bad_regular_reconstruction_has_the_listed_properties():
    f = fx.bad_regular()
    G, rel = f.source, f.relation
    ess = essential_symbols(G)
    zero = G.symbol("000")
    # the lone symbol over 0 has word degree 1
    assert word_degree((zero,), 0, G, rel, ess) == 1
    # four 3-periodic orbits over the two fixed points, classes of size 6
    orbits = [w for w in iter_cycle_words(G, 3, minimal=True) if w == min(w[k:] + w[:k] for k in range(3))]
    assert len(orbits) == 4
    for w in orbits:
        res = class_of(EPSequence.periodic(w), G, rel)
        assert res.finite and res.size == 6
    # four heteroclinic orbits through 000, classes of size 4
    het = [x for x in heteroclinic_points(G, 3, 1) if zero in x.core]
    starts = {(x.left, x.right) for x in het}
    assert len(starts) == 4
    assert all(class_of(x, G, rel).size == 4 for x in het)
    assert rec_degree(G, rel).degree == 6
