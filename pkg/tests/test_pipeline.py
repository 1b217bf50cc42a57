import pytest

from symdyn import fixtures as fx
from symdyn.pipeline import (
    PipelineError,
    irreducible_restrict,
    restrict_factor,
    run_pipeline,
    single_orbit_coding,
    verify_coverage,
    verify_disjointness,
    verify_injectivity,
    verify_levels,
)
from symdyn.relation import fiber
from symdyn.shiftcore import EPSequence, InputError, periodic_points_upto


def certificates(c, f, P):
    return [verify_injectivity(c, P), verify_coverage(c, f, P),
            verify_disjointness(c, P), verify_levels(c, P)]


def test_identity_has_one_level():
    f = fx.identity_golden()
    c = run_pipeline(f, 4, 6)
    assert [lv.order for lv in c.levels] == [1]
    assert all(r.passed for r in certificates(c, f, 6))


def test_two_copy_single_order_two_level():
    f = fx.two_copy()
    c = run_pipeline(f, 4, 6)
    assert c.spectrum == [2]
    assert [lv.order for lv in c.levels] == [2]
    for y in periodic_points_upto(f.target, 5):
        res = c.preimages(y)
        assert res.finite and len(res.members) == 1
        assert c.image(res.members[0]) == y


def test_mixed_fiber_levels():
    f = fx.mixed_fiber()
    c = run_pipeline(f, 6, 8)
    assert [lv.order for lv in c.levels] == [1, 2]
    reports = certificates(c, f, 6)
    assert all(r.passed for r in reports), [r.counterexample for r in reports]
    assert c.provenance


def test_preimages_by_level():
    f = fx.mixed_fiber()
    c = run_pipeline(f, 6, 8)
    for y in periodic_points_upto(f.target, 4):
        per_level = [len(c.preimages(y, k).members) for k in range(len(c.levels))]
        assert sum(per_level) <= 1
        if fiber(y, f).members:
            assert sum(per_level) == 1


def test_under_truncation_reports_a_gap():
    f = fx.identity_full2()
    c = run_pipeline(f, 1, 1)
    rep = verify_coverage(c, f, 3)
    assert not rep.passed and rep.truncated
    assert all(y.period > 1 for y in rep.gap)
    assert verify_injectivity(c, 3).passed


def test_loop_bound_must_cover_period_bound():
    with pytest.raises(InputError):
        run_pipeline(fx.two_copy(), 5, 4)


def test_clique_cap_is_a_pipeline_error():
    with pytest.raises(PipelineError) as err:
        run_pipeline(fx.two_copy(), 3, 4, cap=0)
    assert err.value.level == 1


def test_restrict_factor_keeps_codes():
    f = fx.two_copy()
    g = restrict_factor(f, {f.source.symbol("a1"), f.source.symbol("b1")})
    assert g.source.size == 2
    assert all(g.target.labels[c] in ("a", "b") for c in g.code)


@pytest.mark.parametrize("name", ["twisted_two_copy", "cyclic4", "cyclic_parity"])
def test_irreducible_restriction(name):
    f = fx.FIXTURES[name]()
    res = irreducible_restrict(f, 6)
    assert res.degree == 1
    assert res.image_equal, res.missing


def test_irreducible_restriction_needs_irreducible_source():
    with pytest.raises(InputError):
        irreducible_restrict(fx.mixed_fiber(), 4)


@pytest.mark.parametrize("word,order", [("a", 2), ("c", 1), ("ab", 2)])
def test_single_orbit_coding(word, order):
    f = fx.mixed_fiber()
    y = EPSequence.periodic(f.target.word(word))
    oc = single_orbit_coding(f, y)
    assert oc.order == order
    assert oc.passed
    assert len(oc.fiber_sizes) == y.period


def test_single_orbit_coding_rejects_infinite_fibers():
    f = fx.zero_one_two()
    y = EPSequence.periodic(f.target.word("e"))
    with pytest.raises(InputError):
        single_orbit_coding(f, y)
