"""Injective codings assembled from Bowen quotients and magic-subset recodings.

Level ``i`` takes the quotient of the previous level's factor of order
``N_i``: the fiber size, at that level, of the targets whose original fiber
has the ``i``-th smallest size ``r_i``.  After quotienting those targets
have singleton fibers, the level has degree one, and the points of the
quotient seeing one of its magic words are coded injectively by loop graphs.

Statements that hold "up to a null set" are checked exactly on periodic
points: a periodic orbit carries an invariant measure, so no theorem can
discard it.  Each place where the construction could exclude points is
recorded as a provenance entry.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .degree import rec_degree, sees_magic, shortest_magic_subword
from .quotient import DEFAULT_CLIQUE_CAP, CliqueCapExceeded, QuotientShift, build_quotient, degree_spectrum
from .recode import MagicSubsetCode, disjoint_union, magic_subset_code
from .relation import BowenFactor, ClassResult, fiber, layered_paths
from .shiftcore import (
    EPSequence,
    InputError,
    ShiftGraph,
    ep_shift,
    is_irreducible,
    periodic_points_upto,
    scc_decompose,
)


class PipelineError(InputError):
    """A level could not be built; ``level`` names it."""

    def __init__(self, message: str, level: int):
        super().__init__(f"level {level}: {message}")
        self.level = level


@dataclass
class Level:
    index: int
    order: int
    quotient: QuotientShift
    words: list[tuple[int, ...]]
    recoding: MagicSubsetCode
    code: tuple[int, ...]  # S_i vertex -> target symbol

    @property
    def factor(self) -> BowenFactor:
        return self.quotient.factor


@dataclass
class InjectiveCoding:
    source: BowenFactor
    P: int
    Lmax: int
    spectrum: list[int]
    levels: list[Level]
    graph: ShiftGraph
    code: tuple[int, ...]
    offsets: list[int]
    provenance: list[str] = field(default_factory=list)

    @property
    def target(self) -> ShiftGraph:
        return self.source.target

    def level_of(self, vertex: int) -> int:
        k = 0
        while k + 1 < len(self.offsets) and self.offsets[k + 1] <= vertex:
            k += 1
        return k

    def image(self, s: EPSequence) -> EPSequence:
        return s.map(self.code.__getitem__)

    def preimages(self, y: EPSequence, within: int | None = None) -> ClassResult:
        """All points of the coding shift (or of one level) mapping to ``y``."""
        lo, hi = (0, self.graph.size) if within is None else (
            self.offsets[within], self.offsets[within] + self.levels[within].recoding.graph.size)
        pre: dict[int, set[int]] = {}
        for v in range(lo, hi):
            pre.setdefault(self.code[v], set()).add(v)
        layers = y.map(lambda t: frozenset(pre.get(t, ())))
        return layered_paths(self.graph, layers)


def _level_words(Q: QuotientShift, P: int) -> list[tuple[int, ...]]:
    words = []
    for z in periodic_points_upto(Q.graph, P):
        if sees_magic(z, Q.graph, Q.relation, 1):
            w, _ = shortest_magic_subword(z, Q.graph, Q.relation, 1)
            if w not in words:
                words.append(w)
    return words


def run_pipeline(f: BowenFactor, P: int, Lmax: int, cap: int = DEFAULT_CLIQUE_CAP) -> InjectiveCoding:
    if f.code is None:
        raise InputError("the pipeline needs a factor with a symbol map")
    if Lmax < P:
        raise InputError("loop bound must be at least the period bound")
    spectrum = degree_spectrum(f, P)
    if not spectrum:
        raise InputError("no periodic target of period <= P has a preimage")
    provenance = [
        f"degree spectrum sampled on periodic targets of period <= {P}: {spectrum}",
        f"magic words collected from periodic points of period <= {P}",
        f"loops longer than {Lmax} are not built",
    ]
    levels = []
    current = f
    values = list(spectrum)
    for i in range(len(spectrum)):
        N = values[i]
        try:
            Q = build_quotient(current, N, cap)
        except CliqueCapExceeded as exc:
            raise PipelineError(str(exc), i + 1) from exc
        values = [math.comb(v, N) for v in values]
        rep = rec_degree(Q.graph, Q.relation)
        if rep.degree != 1:
            raise PipelineError(f"quotient of order {N} has degree {rep.degree}", i + 1)
        words = _level_words(Q, P)
        if not words:
            words = [rep.word]
            provenance.append(f"level {i + 1}: no periodic point of period <= {P} sees magic; "
                              "used the automaton witness")
        rec = magic_subset_code(Q.graph, words, Lmax)
        provenance.extend(f"level {i + 1}: {w}" for w in rec.warnings)
        code = tuple(Q.factor.code[c] for c in rec.code)
        levels.append(Level(i + 1, N, Q, words, rec, code))
        current = Q.factor
    graph, offsets = disjoint_union([lv.recoding.graph for lv in levels],
                                    [f"L{lv.index}/" for lv in levels])
    code = tuple(c for lv in levels for c in lv.code)
    return InjectiveCoding(f, P, Lmax, spectrum, levels, graph, code, offsets, provenance)


# ---------------------------------------------------------------------------
# certificates


@dataclass
class CodingReport:
    kind: str
    passed: bool
    checked: int
    counterexample: dict | None = None
    gap: list[EPSequence] = field(default_factory=list)

    @property
    def truncated(self) -> bool:
        return bool(self.gap)


def _chain(c: InjectiveCoding, s: EPSequence) -> dict:
    """Lift chain of a point of the coding shift: level, loop-graph point,
    quotient point and original point."""
    k = c.level_of(s[0])
    lv = c.levels[k]
    local = s.map(lambda v: v - c.offsets[k])
    z = lv.recoding.image(local)
    return {"level": lv.index, "loop_point": local.render(lv.recoding.graph),
            "quotient_point": z.render(lv.quotient.graph),
            "source_point": _down(lv.quotient, z)}


def _down(Q: QuotientShift, z: EPSequence) -> str:
    x = Q.q_map(z)
    parent = Q.parent
    while isinstance(parent.lift, QuotientShift):
        x = parent.lift.q_map(x)
        parent = parent.lift.parent
    return x.render(parent.source)


def verify_injectivity(c: InjectiveCoding, P: int) -> CodingReport:
    """Every periodic target of period <= P has at most one preimage (of any kind)."""
    n = 0
    for y in periodic_points_upto(c.target, P):
        res = c.preimages(y)
        n += 1
        if not res.finite or len(res.members) > 1:
            ex = {"target": y.render(c.target)}
            if res.finite:
                ex["preimages"] = [_chain(c, s) for s in res.members[:2]]
            else:
                ex["preimages"] = "infinite"
            return CodingReport("injectivity", False, n, ex)
    return CodingReport("injectivity", True, n)


def verify_coverage(c: InjectiveCoding, f: BowenFactor, P: int) -> CodingReport:
    """Every periodic point of the image of ``f`` with period <= P is coded.

    Misses of period beyond the pipeline's own bound are a truncation gap;
    misses within it are counterexamples.
    """
    n = 0
    gap = []
    for y in periodic_points_upto(c.target, P):
        if not fiber(y, f).members:
            continue
        n += 1
        if c.preimages(y).members:
            continue
        if y.period > c.P or y.period > c.Lmax:
            gap.append(y)
            continue
        return CodingReport("coverage", False, n, {"target": y.render(c.target)}, gap)
    return CodingReport("coverage", not gap, n, None, gap)


def verify_disjointness(c: InjectiveCoding, P: int) -> CodingReport:
    """Level images are pairwise disjoint, and targets coded at a level have
    empty fibers in every later quotient."""
    images = []
    for k in range(len(c.levels)):
        images.append({y for y in periodic_points_upto(c.target, P) if c.preimages(y, k).members})
    n = 0
    for i in range(len(c.levels)):
        for j in range(i):
            n += 1
            both = images[i] & images[j]
            if both:
                y = min(both, key=repr)
                return CodingReport("disjointness", False, n,
                                    {"target": y.render(c.target), "levels": [j + 1, i + 1]})
            for y in images[j]:
                if fiber(y, c.levels[i].factor).members:
                    return CodingReport("disjointness", False, n,
                                        {"target": y.render(c.target), "coded_at": j + 1,
                                         "reappears_at": i + 1})
    return CodingReport("disjointness", True, n)


def verify_levels(c: InjectiveCoding, P: int) -> CodingReport:
    """Fiber sizes at each level follow the binomial recursion."""
    n = 0
    for y in periodic_points_upto(c.target, P):
        r = fiber(y, c.source)
        if not r.members:
            continue
        d = len(r.members)
        for lv in c.levels:
            d = math.comb(d, lv.order)
            got = fiber(y, lv.factor)
            n += 1
            if not got.finite or len(got.members) != d:
                return CodingReport("levels", False, n, {"target": y.render(c.target), "level": lv.index,
                                                         "expected": d, "found": got.size})
    return CodingReport("levels", True, n)


# ---------------------------------------------------------------------------
# irreducible and single-orbit variants


def restrict_factor(f: BowenFactor, keep) -> BowenFactor:
    """The factor restricted to the subgraph on ``keep`` (which should be essential)."""
    sub, remap = f.source.restrict(keep)
    inv = sorted(remap, key=remap.get)
    code = tuple(f.code[a] for a in inv)
    return BowenFactor(sub, f.relation.restrict(remap), f.target, code, name=f"{f.name}|restricted")


@dataclass
class RestrictionResult:
    quotient: QuotientShift
    component: frozenset[int]
    factor: BowenFactor
    degree: int
    image_equal: bool
    missing: list[EPSequence]


def irreducible_restrict(f: BowenFactor, P: int, Lmax: int | None = None) -> RestrictionResult:
    """Quotient of the least order in the spectrum, restricted to the
    irreducible component that carries its magic word."""
    if not is_irreducible(f.source):
        raise InputError("source shift is not irreducible")
    spectrum = degree_spectrum(f, P)
    if not spectrum:
        raise InputError("no periodic target has a preimage")
    Q = build_quotient(f, spectrum[0])
    rep = rec_degree(Q.graph, Q.relation)
    dec = scc_decompose(Q.graph)
    comp = dec.components[dec.component_of[rep.word[0]]]
    g = restrict_factor(Q.factor, comp)
    d = rec_degree(g.source, g.relation).degree
    missing = [y for y in periodic_points_upto(f.target, P)
               if fiber(y, f).members and not fiber(y, g).members]
    return RestrictionResult(Q, comp, g, d, not missing, missing)


@dataclass
class OrbitCoding:
    order: int
    quotient: QuotientShift
    component: frozenset[int]
    factor: BowenFactor
    fiber_sizes: list[int]

    @property
    def passed(self) -> bool:
        return all(s == 1 for s in self.fiber_sizes)


def single_orbit_coding(f: BowenFactor, y: EPSequence, Lmax: int | None = None) -> OrbitCoding:
    """A factor, one fiber-size quotient restricted to a component, with
    singleton fibers over every point of the orbit of ``y``."""
    if not y.is_periodic:
        raise InputError("target must be periodic")
    res = fiber(y, f)
    if not res.finite:
        raise InputError("infinite fiber: factor is not finite-to-one")
    if not res.members:
        raise InputError("orbit is not in the image")
    N = len(res.members)
    Q = build_quotient(f, N)
    yhat = Q.subset_sequence(res.members)
    if yhat is None:  # pragma: no cover - the fiber is a related N-set at each time
        raise InputError("fiber does not form a quotient point")
    dec = scc_decompose(Q.graph)
    comp = dec.components[dec.component_of[yhat[0]]]
    g = restrict_factor(Q.factor, comp)
    sizes = []
    for k in range(y.period):
        r = fiber(ep_shift(y, k), g)
        sizes.append(r.size if r.finite else -1)
    return OrbitCoding(N, Q, comp, g, sizes)
