import math

import pytest
from hypothesis import given, strategies as st

from strategies import brute_middle_count, graphs, relations
from symdyn import fixtures as fx
from symdyn.relation import (
    BowenFactor,
    SymRelation,
    bowen_equivalent,
    canonical_relation,
    class_of,
    fiber,
    is_transitive,
    multiplicity_table,
    propagate_bound,
    resolving_check,
    verify_bowen_property,
    word_related,
)
from symdyn.shiftcore import EPSequence, InputError, ShiftGraph, heteroclinic_points, periodic_points_upto


def test_closure_is_recorded():
    rel = SymRelation.from_pairs(3, [(0, 1)])
    assert rel.related(1, 0) and rel.related(2, 2)
    assert (1, 0) in rel.added
    assert (0, 1) not in rel.added
    with pytest.raises(InputError):
        SymRelation.from_pairs(2, [(0, 5)])


def test_from_key_is_an_equivalence():
    rel = SymRelation.from_key("aabb")
    assert rel.is_transitive_on_symbols()
    assert rel.max_degree() == 2


def test_word_related():
    rel = SymRelation.from_pairs(3, [(0, 2)])
    assert word_related((0, 1), (2, 1), rel)
    assert not word_related((0, 1), (1, 1), rel)


def test_bowen_equivalent_on_tails():
    rel = SymRelation.from_pairs(3, [(0, 2)])
    x = EPSequence((1,), (0, 0), (1,), 0)
    y = EPSequence((1,), (2, 0), (1,), 0)
    assert bowen_equivalent(x, y, rel)
    assert not bowen_equivalent(x, EPSequence.periodic((1,)), rel)


# -- classes -------------------------------------------------------------------


def test_zero_one_two_classes():
    f = fx.zero_one_two()
    G, rel = f.source, f.relation
    for k in range(1, 6):
        x = EPSequence((1,), (0,) * k, (1,), 0)
        res = class_of(x, G, rel)
        assert res.finite and res.size == 2 ** k
    res = class_of(EPSequence.periodic((1, 0)), G, rel)
    assert not res.finite and res.witness is not None


@pytest.mark.parametrize("name", ["two_copy", "mixed_fiber", "cyclic4", "cyclic_parity", "bad_regular"])
def test_class_sizes_match_brute_force(name):
    f = fx.FIXTURES[name]()
    G, rel = f.source, f.relation
    pts = periodic_points_upto(G, 3) + heteroclinic_points(G, 1, 1)
    for x in pts[:40]:
        res = class_of(x, G, rel)
        assert res.finite
        assert x in res.members
        assert brute_middle_count(x, G, rel, 6, 6) == res.size


def test_members_are_related_and_valid():
    f = fx.mixed_fiber()
    for y in periodic_points_upto(f.target, 4):
        res = fiber(y, f)
        for x in res.members:
            assert x.is_valid_in(f.source)
            assert f.image(x) == y
            assert all(bowen_equivalent(x, z, f.relation) for z in res.members)


def test_class_rejects_invalid_point():
    f = fx.two_copy()
    with pytest.raises(InputError):
        class_of(EPSequence.periodic((1,)), f.source, f.relation)


# -- Bowen verification --------------------------------------------------------


@pytest.mark.parametrize("name", fx.CODED_FIXTURES)
def test_shipped_fixtures_are_bowen(name):
    rep = verify_bowen_property(fx.FIXTURES[name](), 3)
    assert rep.passed, rep.reason
    assert rep.factor.verified


def test_too_small_relation_is_caught():
    f = fx.two_copy().with_relation(SymRelation.equality(4))
    rep = verify_bowen_property(f, 3)
    assert not rep.passed
    x, y = rep.counterexample
    assert x.is_valid_in(f.source) and y.is_valid_in(f.source)
    assert f.image(x) == f.image(y)
    assert not bowen_equivalent(x, y, f.relation)


def test_explicit_points_give_a_pointwise_counterexample():
    f = fx.two_copy().with_relation(SymRelation.equality(4))
    pts = periodic_points_upto(f.source, 2)
    rep = verify_bowen_property(f, 2, points=pts)
    assert not rep.passed and not rep.exact
    x, y = rep.counterexample
    assert x in pts
    assert f.image(x) == f.image(y) and not bowen_equivalent(x, y, f.relation)


def test_too_large_relation_is_caught():
    f = fx.two_copy()
    X = f.source
    rel = SymRelation.from_pairs(4, f.relation.sorted_pairs() + [(X.symbol("a1"), X.symbol("b2"))])
    g = f.with_relation(rel)
    rep = verify_bowen_property(g, 3)
    assert not rep.passed
    x, y = rep.counterexample
    assert bowen_equivalent(x, y, rel) and g.image(x) != g.image(y)


def test_generic_map_check_finds_alpha_omega_failure():
    f = fx.alpha_omega()
    recurrent = periodic_points_upto(f.source, 3)
    assert verify_bowen_property(f, 3, points=recurrent).passed
    rep = verify_bowen_property(f, 3, points=fx.alpha_omega_family())
    assert not rep.passed


@given(graphs(max_size=4), st.data())
def test_canonical_relation_is_minimal(G, data):
    k = data.draw(st.integers(1, 2))
    code = tuple(data.draw(st.lists(st.integers(0, k - 1), min_size=G.size, max_size=G.size)))
    Y = ShiftGraph(tuple(str(i) for i in range(k)),
                   frozenset((code[a], code[b]) for a, b in G.arrows))
    kernel = SymRelation.from_key(code)
    f = BowenFactor(G, kernel, Y, code)
    can = canonical_relation(f)
    assert can.issubset(kernel)
    for rel in (kernel, data.draw(relations(G.size))):
        g = f.with_relation(SymRelation(G.size, rel.pairs & kernel.pairs | can.pairs))
        if verify_bowen_property(g, 2).passed:
            assert can.issubset(g.relation)


# -- transitivity ----------------------------------------------------------------


def test_transitivity_examples():
    f = fx.two_copy()
    assert is_transitive(f.source, f.relation).transitive
    # 0 ~ 1 ~ 2 on the full 3-shift but not 0 ~ 2
    G = ShiftGraph.full_shift(3)
    rel = SymRelation.from_pairs(3, [(0, 1), (1, 2)])
    rep = is_transitive(G, rel)
    assert not rep.transitive
    x, y, z = rep.witness
    assert bowen_equivalent(x, y, rel) and bowen_equivalent(y, z, rel)
    assert not bowen_equivalent(x, z, rel)


def test_cyclic_parity_extra_pair_is_harmless():
    f = fx.cyclic_parity()
    assert not f.relation.is_transitive_on_symbols()
    assert is_transitive(f.source, f.relation).transitive


# -- resolving and multiplicities --------------------------------------------------


def test_resolving_on_two_copy():
    f = fx.two_copy()
    x = EPSequence.periodic(f.source.word(["a1", "b1"]))
    rep = resolving_check(x, f.source, f.relation)
    assert rep.passed and rep.R == 2


def test_resolving_reports_infinite_class():
    f = fx.zero_one_two()
    rep = resolving_check(EPSequence.periodic((1, 0)), f.source, f.relation)
    assert not rep.finite and not rep.passed


def test_multiplicity_and_propagation():
    f = fx.mixed_fiber()
    C = multiplicity_table(f, 3)
    assert set(C.values()) == {1, 2}
    B = propagate_bound(C, 2)
    assert all(B[k] == math.ceil(C[k] ** 2 / 2) for k in C)
