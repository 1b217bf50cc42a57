"""Bowen quotients of order N.

The symbols of the quotient are the N-element sets of pairwise related
symbols.  ``A -> B`` when the arrows of the original graph restricted to
``A x B`` form a bijection.  Every bi-infinite path of the quotient lifts
through each element of its time-zero symbol to a unique path of the
original shift; the quotient factor map sends ``x^`` to the image of the
lift through ``min(x^_0)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

from .relation import BowenFactor, ClassResult, SymRelation, fiber
from .shiftcore import (
    EPSequence,
    InputError,
    ShiftGraph,
    ep_from_chase,
    ep_get,
    ep_zip,
    essential_symbols,
    periodic_points_upto,
    scc_decompose,
)

DEFAULT_CLIQUE_CAP = 200_000


class CliqueCapExceeded(InputError):
    """The number of pairwise related N-sets exceeds the configured cap."""


def related_cliques(rel: SymRelation, N: int, symbols=None, cap: int = DEFAULT_CLIQUE_CAP) -> list[frozenset[int]]:
    """All N-sets of pairwise related symbols, sorted by their sorted tuples."""
    if N < 1:
        raise InputError("order must be positive")
    pool = sorted(range(rel.size) if symbols is None else symbols)
    allowed = set(pool)
    out: list[tuple[int, ...]] = []

    def grow(clique: list[int], cands: list[int]):
        if len(clique) == N:
            out.append(tuple(clique))
            if len(out) > cap:
                raise CliqueCapExceeded(f"more than {cap} related {N}-sets")
            return
        for i, c in enumerate(cands):
            clique.append(c)
            grow(clique, [d for d in cands[i + 1:] if rel.related(c, d)])
            clique.pop()

    for a in pool:
        grow([a], [b for b in rel.neighbors(a) if b > a and b in allowed])
    out.sort()
    return [frozenset(c) for c in out]


def _bijection(G: ShiftGraph, A: frozenset[int], B: frozenset[int]) -> bool:
    for a in A:
        if sum(1 for b in G.succ[a] if b in B) != 1:
            return False
    for b in B:
        if sum(1 for a in G.pred[b] if a in A) != 1:
            return False
    return True


@dataclass(eq=False)
class QuotientShift:
    """The order-N quotient of a factor.

    ``subsets[i]`` is the set of original symbols making up quotient symbol
    ``i``.  The total order used by ``q_N`` is the order of symbol ids.
    """

    parent: BowenFactor
    order: int
    subsets: tuple[frozenset[int], ...]
    graph: ShiftGraph
    relation: SymRelation
    factor: BowenFactor = field(init=False)

    def __post_init__(self):
        f = self.parent
        code = tuple(f.code[min(A)] for A in self.subsets)
        self.factor = BowenFactor(self.graph, self.relation, f.target, code, lift=self,
                                  name=f"{f.name}/Q{self.order}" if f.name else f"Q{self.order}")

    @cached_property
    def essential(self) -> frozenset[int]:
        return essential_symbols(self.graph)

    @cached_property
    def essential_graph(self) -> ShiftGraph:
        return self.graph.restrict(self.essential)[0]

    def label(self, i: int) -> str:
        return self.graph.labels[i]

    def lift_word(self, word, a: int, index: int = 0) -> tuple[int, ...]:
        """``Q(x^, a)`` for a finite path ``word`` of the quotient with ``a`` in ``word[index]``."""
        G = self.parent.source
        if a not in self.subsets[word[index]]:
            raise InputError("lift symbol is not in the chosen quotient symbol")
        out = {index: a}
        for n in range(index, len(word) - 1):
            out[n + 1] = next(b for b in G.succ[out[n]] if b in self.subsets[word[n + 1]])
        for n in range(index, 0, -1):
            out[n - 1] = next(b for b in G.pred[out[n]] if b in self.subsets[word[n - 1]])
        return tuple(out[n] for n in range(len(word)))

    def lift_path(self, xhat: EPSequence, a: int) -> EPSequence:
        """``Q(x^, a)``: the unique lift through ``a`` at time zero."""
        if a not in self.subsets[xhat[0]]:
            raise InputError("lift symbol is not in x^_0")
        G = self.parent.source
        subs = self.subsets

        def nxt(n, s):
            return next(b for b in G.succ[s] if b in subs[ep_get(xhat, n + 1)])

        def prv(n, s):
            return next(b for b in G.pred[s] if b in subs[ep_get(xhat, n - 1)])

        return ep_from_chase(0, a, nxt, prv, xhat.start, xhat.end, len(xhat.left), len(xhat.right))

    def q_map(self, xhat: EPSequence) -> EPSequence:
        return self.lift_path(xhat, min(self.subsets[xhat[0]]))

    def composed_image(self, xhat: EPSequence) -> EPSequence:
        return self.parent.image(self.q_map(xhat))

    def subset_sequence(self, lifts) -> EPSequence | None:
        """The quotient point ``n -> {x_n : x in lifts}`` if every such set is a symbol."""
        index = {A: i for i, A in enumerate(self.subsets)}
        z = ep_zip(lambda *s: index.get(frozenset(s)), *lifts)
        if None in z.left or None in z.core or None in z.right:
            return None
        return z

    def degree_bound(self) -> int:
        """Upper bound on in/out degrees of the quotient graph."""
        G = self.parent.source
        rel = self.parent.relation
        best = 0
        for a in range(G.size):
            reach_out = {c for b in G.succ[a] for c in rel.neighbors(b)}
            reach_in = {c for b in G.pred[a] for c in rel.neighbors(b)}
            best = max(best, math.comb(len(reach_out), self.order), math.comb(len(reach_in), self.order))
        return best

    def max_degree(self) -> int:
        g = self.graph
        return max([len(s) for s in g.succ] + [len(s) for s in g.pred] + [0])

    def components(self) -> list[frozenset[int]]:
        """Nontrivial irreducible components of the quotient graph."""
        return scc_decompose(self.graph).nontrivial_components()


def build_quotient(f: BowenFactor, N: int, cap: int = DEFAULT_CLIQUE_CAP) -> QuotientShift:
    """The order-N Bowen quotient of a factor with a symbol map."""
    if f.code is None:
        raise InputError("quotients need a factor with a symbol map")
    G = f.source
    rel = f.relation
    cliques = related_cliques(rel, N, cap=cap)
    by_symbol: dict[int, list[int]] = {}
    for i, A in enumerate(cliques):
        for a in A:
            by_symbol.setdefault(a, []).append(i)
    arrows = set()
    for i, A in enumerate(cliques):
        cands = set()
        for s in G.succ[min(A)]:
            cands.update(by_symbol.get(s, ()))
        for j in sorted(cands):
            if _bijection(G, A, cliques[j]):
                arrows.add((i, j))
    labels = tuple("{" + ",".join(G.labels[a] for a in sorted(A)) + "}" for A in cliques)
    graph = ShiftGraph(labels, frozenset(arrows))
    pairs = [(i, j) for i, A in enumerate(cliques) for j, B in enumerate(cliques)
             if all(rel.related(a, b) for a in A for b in B)]
    relN = SymRelation.from_pairs(len(cliques), pairs)
    return QuotientShift(f, N, tuple(cliques), graph, relN)


@dataclass
class CensusRow:
    target: EPSequence
    r: int
    rN: int
    expected: int
    subset_form: bool

    @property
    def ok(self) -> bool:
        return self.rN == self.expected and self.subset_form


@dataclass
class FiberCensus:
    order: int
    rows: list[CensusRow]

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.rows)

    def failures(self) -> list[CensusRow]:
        return [r for r in self.rows if not r.ok]


def _size(res: ClassResult) -> int:
    if not res.finite:
        raise InputError("infinite fiber: factor is not finite-to-one")
    return len(res.members)


def fiber_census(f: BowenFactor, Q: QuotientShift, P: int) -> FiberCensus:
    """Compare quotient fibers with binomial coefficients of the original ones
    over every periodic target of period <= P."""
    rows = []
    for y in periodic_points_upto(f.target, P):
        base = fiber(y, f)
        r = _size(base)
        top = fiber(y, Q.factor)
        rN = _size(top)
        members = set(base.members)
        form = True
        for xhat in top.members:
            lifts = {Q.lift_path(xhat, a) for a in Q.subsets[xhat[0]]}
            if len(lifts) != Q.order or not lifts <= members or Q.subset_sequence(sorted(lifts, key=repr)) != xhat:
                form = False
        rows.append(CensusRow(y, r, rN, math.comb(r, Q.order), form))
    return FiberCensus(Q.order, rows)


def degree_spectrum(f: BowenFactor, P: int) -> list[int]:
    """Fiber cardinalities over periodic targets of period <= P (nonempty fibers)."""
    sizes = set()
    for y in periodic_points_upto(f.target, P):
        r = _size(fiber(y, f))
        if r:
            sizes.add(r)
    return sorted(sizes)
