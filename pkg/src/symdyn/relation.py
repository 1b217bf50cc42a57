"""Symmetric relations, Bowen factors and exact decisions about classes.

The workhorse is :func:`layered_paths`: given an eventually periodic
sequence of symbol sets ``C_n`` it prunes every layer to the symbols that
lie on a bi-infinite path ``x`` with ``x_n in C_n`` and then either lists
all such paths or reports that there are infinitely many.  Bowen classes
use ``C_n = {b : b ~ x_n}`` and fibers of one-block codes use
``C_n = Pi^{-1}(y_n)``.
"""
from __future__ import annotations

import math
from collections.abc import Callable, Hashable, Iterable, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property

from .shiftcore import (
    EPSequence,
    InputError,
    ShiftGraph,
    ep_from_chase,
    ep_get,
    ep_mirror,
    ep_zip,
    essential_symbols,
    heteroclinic_points,
    path_through,
    periodic_points_upto,
    reverse_graph,
)


# ---------------------------------------------------------------------------
# relations


@dataclass(frozen=True)
class SymRelation:
    """Reflexive and symmetric relation on ``range(size)``.

    ``pairs`` always contains both orders and the diagonal.  ``added``
    records the pairs that closure had to add to the user's input.
    """

    size: int
    pairs: frozenset[tuple[int, int]]
    added: frozenset[tuple[int, int]] = frozenset()

    @classmethod
    def from_pairs(cls, size: int, pairs: Iterable[tuple[int, int]]) -> "SymRelation":
        given = set()
        for a, b in pairs:
            if not (0 <= a < size and 0 <= b < size):
                raise InputError(f"relation pair ({a}, {b}) uses an unknown symbol")
            given.add((a, b))
        closed = set(given)
        closed.update((b, a) for a, b in given)
        closed.update((a, a) for a in range(size))
        return cls(size, frozenset(closed), frozenset(closed - given))

    @classmethod
    def equality(cls, size: int) -> "SymRelation":
        return cls(size, frozenset((a, a) for a in range(size)))

    @classmethod
    def from_key(cls, keys: Sequence[Hashable]) -> "SymRelation":
        """``a ~ b`` iff ``keys[a] == keys[b]``."""
        groups: dict = {}
        for a, k in enumerate(keys):
            groups.setdefault(k, []).append(a)
        pairs = frozenset((a, b) for g in groups.values() for a in g for b in g)
        return cls(len(keys), pairs)

    @cached_property
    def _nbrs(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.size)]
        for a, b in self.pairs:
            out[a].append(b)
        return tuple(tuple(sorted(x)) for x in out)

    def neighbors(self, a: int) -> tuple[int, ...]:
        return self._nbrs[a]

    def related(self, a: int, b: int) -> bool:
        return (a, b) in self.pairs

    def max_degree(self) -> int:
        return max((len(n) for n in self._nbrs), default=0)

    def is_transitive_on_symbols(self) -> bool:
        return all((a, c) in self.pairs for a, b in self.pairs for c in self._nbrs[b])

    def sorted_pairs(self) -> list[tuple[int, int]]:
        return sorted((a, b) for a, b in self.pairs if a < b)

    def issubset(self, other: "SymRelation") -> bool:
        return self.pairs <= other.pairs

    def restrict(self, remap: dict[int, int]) -> "SymRelation":
        """The relation on the kept symbols, renumbered by ``remap`` (old -> new)."""
        return SymRelation(len(remap), frozenset((remap[a], remap[b]) for a, b in self.pairs
                                                 if a in remap and b in remap))


def word_related(v: Sequence[int], w: Sequence[int], rel: SymRelation) -> bool:
    return len(v) == len(w) and all(rel.related(a, b) for a, b in zip(v, w))


def bowen_equivalent(x: EPSequence, y: EPSequence, rel: SymRelation) -> bool:
    z = ep_zip(rel.related, x, y)
    return all(z.left) and all(z.core) and all(z.right)


# ---------------------------------------------------------------------------
# codes and factors


@dataclass(frozen=True)
class BowenFactor:
    """A factor map out of the shift on ``source`` with a claimed Bowen relation.

    The map is one of:

    * a one-block code ``code`` (tuple, symbol id -> target symbol id),
    * a composed map ``pi o q_N`` when ``lift`` holds the quotient it was
      built from (``code`` then records the induced symbol map),
    * an arbitrary ``image_fn`` on EPSequences.
    """

    source: ShiftGraph
    relation: SymRelation
    target: ShiftGraph | None = None
    code: tuple[int, ...] | None = None
    image_fn: Callable[[EPSequence], EPSequence] | None = field(default=None, compare=False)
    lift: object | None = field(default=None, compare=False, repr=False)
    verified: bool = False
    name: str = ""

    def __post_init__(self):
        if self.relation.size != self.source.size:
            raise InputError("relation and shift have different alphabets")
        if self.code is not None:
            code = tuple(int(c) for c in self.code)
            object.__setattr__(self, "code", code)
            if len(code) != self.source.size:
                raise InputError("code must map every source symbol")
            if self.target is None:
                raise InputError("one-block code needs a target graph")
            for c in code:
                if not 0 <= c < self.target.size:
                    raise InputError(f"code maps to unknown target symbol {c}")
            if self.lift is None:
                for a, b in self.source.arrows:
                    if not self.target.has_arrow(code[a], code[b]):
                        raise InputError(
                            f"code does not respect arrow "
                            f"{self.source.labels[a]}->{self.source.labels[b]}")
        elif self.image_fn is None:
            raise InputError("a factor needs a code or an image function")

    @property
    def is_one_block(self) -> bool:
        return self.code is not None and self.image_fn is None

    @cached_property
    def preimage_sets(self) -> tuple[frozenset[int], ...]:
        out: list[set[int]] = [set() for _ in range(self.target.size)]
        for a, t in enumerate(self.code):
            out[t].add(a)
        return tuple(frozenset(s) for s in out)

    def image(self, x: EPSequence) -> EPSequence:
        if self.image_fn is not None:
            return self.image_fn(x)
        if self.lift is not None:
            return self.lift.composed_image(x)
        return x.map(self.code.__getitem__)

    def with_relation(self, rel: SymRelation) -> "BowenFactor":
        return replace(self, relation=rel, verified=False)


# ---------------------------------------------------------------------------
# layered path sets


@dataclass(frozen=True)
class ClassResult:
    """All bi-infinite paths through a sequence of layers.

    ``finite`` tells whether the set is finite.  Finite results list the
    members in sorted canonical order; infinite ones give a branching
    ``witness`` ``(position, symbol, direction)``.  ``layers`` holds the
    pruned layers ``{y_n : y in the set}``.
    """

    finite: bool
    members: tuple[EPSequence, ...]
    layers: EPSequence
    witness: tuple | None = None

    @property
    def size(self) -> int | None:
        return len(self.members) if self.finite else None

    def __len__(self) -> int:
        if not self.finite:
            raise ValueError("infinite class has no length")
        return len(self.members)


def _forward_alive(G: ShiftGraph, layers: EPSequence) -> EPSequence:
    """``F(n)``: symbols of layer ``n`` starting an infinite path through the layers."""
    v = layers.right
    q = len(v)
    alive = [set(v[f]) for f in range(q)]
    changed = True
    while changed:
        changed = False
        for f in range(q):
            nxt = alive[(f + 1) % q]
            keep = {s for s in alive[f] if any(t in nxt for t in G.succ[s])}
            if keep != alive[f]:
                alive[f] = keep
                changed = True
    right = tuple(frozenset(a) for a in alive)
    p, S, R = len(layers.left), layers.start, layers.end
    values: dict[int, frozenset] = {}
    seen: dict = {}
    cur = right[0]
    n = R - 1
    while True:
        layer = ep_get(layers, n)
        cur = frozenset(s for s in layer if any(t in cur for t in G.succ[s]))
        if n < S:
            key = ((n - S) % p, cur)
            if key in seen:
                n0 = seen[key]
                break
            seen[key] = n
        values[n] = cur
        n -= 1
    left = tuple(values[k] for k in range(n + 1, n0 + 1))
    core = tuple(values[k] for k in range(n0 + 1, R))
    return EPSequence(left, core, right, n0 + 1)


def prune_layers(G: ShiftGraph, layers: EPSequence) -> EPSequence:
    """Layers cut down to symbols on bi-infinite paths through all layers."""
    fwd = _forward_alive(G, layers)
    bwd = ep_mirror(_forward_alive(reverse_graph(G), ep_mirror(layers)))
    return ep_zip(frozenset.intersection, fwd, bwd)


def layered_paths(G: ShiftGraph, layers: EPSequence, limit: int = 200_000) -> ClassResult:
    """Every bi-infinite path ``x`` of ``G`` with ``x_n in layers[n]``."""
    A = prune_layers(G, layers)
    if not A.right[0]:
        return ClassResult(True, (), A)
    p, q = len(A.left), len(A.right)
    S, E = A.start, A.end
    for f in range(q):
        nxt = A.right[(f + 1) % q]
        for s in sorted(A.right[f]):
            if sum(1 for t in G.succ[s] if t in nxt) >= 2:
                return ClassResult(False, (), A, (E + f, s, "forward"))
    for f in range(p):
        prv = A.left[(f - 1) % p]
        for s in sorted(A.left[f]):
            if sum(1 for t in G.pred[s] if t in prv) >= 2:
                return ClassResult(False, (), A, (S - p + f, s, "backward"))

    members = []
    for s in sorted(A.right[0]):
        # deterministic forward tail
        vals = [s]
        states = {(0, s): 0}
        while True:
            f = len(vals) - 1
            nxt = A.right[(f + 1) % q]
            t = next(t for t in G.succ[vals[-1]] if t in nxt)
            key = ((f + 1) % q, t)
            if key in states:
                i = states[key]
                break
            states[key] = len(vals)
            vals.append(t)
        right = tuple(vals[i:])
        head = vals[:i]  # positions E .. E+i-1

        # branching backwards through the core, then deterministic
        def back(pos, after, acc):
            if pos >= S - 1:
                for t in sorted(ep_get(A, pos)):
                    if G.has_arrow(t, after):
                        yield from back(pos - 1, t, [t] + acc)
                return
            seen: dict = {}
            tail: list[int] = []  # values at pos, pos-1, ...
            cur_pos, cur = pos, after
            while True:
                t = next(t for t in G.pred[cur] if t in ep_get(A, cur_pos))
                key = ((cur_pos - S) % p, t)
                if key in seen:
                    old = seen[key]
                    break
                seen[key] = cur_pos
                tail.append(t)
                cur, cur_pos = t, cur_pos - 1
            # periodic to the left of ``old`` with period old - cur_pos
            vals_at = {pos - k: tail[k] for k in range(len(tail))}
            left = tuple(vals_at[k] for k in range(cur_pos + 1, old + 1))
            core_vals = tuple(vals_at[k] for k in range(old + 1, pos + 1)) + tuple(acc)
            yield left, core_vals, old + 1

        for left, core_vals, start in back(E - 1, s, []):
            members.append(EPSequence(left, core_vals + tuple(head), right, start))
            if len(members) > limit:
                raise InputError("class enumeration limit exceeded")
    members = sorted(set(members), key=_ep_key)
    return ClassResult(True, tuple(members), A)


def _ep_key(x: EPSequence):
    return (x.start, x.left, x.core, x.right)


def _check_valid(x: EPSequence, G: ShiftGraph):
    if not x.is_valid_in(G):
        raise InputError("sequence is not a path of the shift")


def class_of(x: EPSequence, G: ShiftGraph, rel: SymRelation, limit: int = 200_000) -> ClassResult:
    """The Bowen class ``{y : y_n ~ x_n for all n}``."""
    _check_valid(x, G)
    return layered_paths(G, x.map(lambda s: frozenset(rel.neighbors(s))), limit)


def fiber(y: EPSequence, f: BowenFactor, limit: int = 200_000) -> ClassResult:
    """Preimages of ``y`` under a factor with a symbol map (one-block or composed)."""
    if f.code is None:
        raise InputError("fiber enumeration needs a symbol map")
    pre = f.preimage_sets
    for s in y.symbols():
        if not (isinstance(s, int) and 0 <= s < len(pre)):
            raise InputError(f"unknown target symbol {s!r}")
    return layered_paths(f.source, y.map(pre.__getitem__), limit)


# ---------------------------------------------------------------------------
# pair and triple product graphs


def pair_graph(G: ShiftGraph, allowed: Callable[[int, int], bool]) -> tuple[ShiftGraph, list[tuple[int, int]]]:
    verts = [(a, b) for a in range(G.size) for b in range(G.size) if allowed(a, b)]
    index = {v: i for i, v in enumerate(verts)}
    arrows = set()
    for (a, b), i in index.items():
        for a2 in G.succ[a]:
            for b2 in G.succ[b]:
                j = index.get((a2, b2))
                if j is not None:
                    arrows.add((i, j))
    labels = tuple(f"{G.labels[a]}|{G.labels[b]}" for a, b in verts)
    return ShiftGraph(labels, frozenset(arrows)), verts


def canonical_relation(f: BowenFactor) -> SymRelation:
    """``a ~ b`` iff some two points with equal image pass through ``a`` and
    ``b`` at the same time; the reflexive closure is added."""
    if not f.is_one_block:
        raise InputError("canonical relation needs a one-block code")
    code = f.code
    P, verts = pair_graph(f.source, lambda a, b: code[a] == code[b])
    ess = essential_symbols(P)
    return SymRelation.from_pairs(f.source.size, [verts[i] for i in ess])


def _unzip(z: EPSequence, k: int) -> list[EPSequence]:
    return [z.map(lambda t, j=j: t[j]) for j in range(k)]


@dataclass(frozen=True)
class TransitivityReport:
    transitive: bool
    witness: tuple[EPSequence, EPSequence, EPSequence] | None = None
    bad_vertex: tuple[int, int, int] | None = None


def is_transitive(G: ShiftGraph, rel: SymRelation) -> TransitivityReport:
    """Decide whether Bowen equivalence of ``rel`` is transitive on the shift.

    Builds the graph of triples ``(a, b, c)`` with ``a ~ b ~ c`` and
    componentwise arrows.  Equivalence fails to be transitive iff a triple
    with ``a`` not related to ``c`` lies on a bi-infinite path.
    """
    verts = [(a, b, c) for a in range(G.size) for b in rel.neighbors(a) for c in rel.neighbors(b)]
    index = {v: i for i, v in enumerate(verts)}
    arrows = set()
    for (a, b, c), i in index.items():
        for a2 in G.succ[a]:
            for b2 in G.succ[b]:
                for c2 in G.succ[c]:
                    j = index.get((a2, b2, c2))
                    if j is not None:
                        arrows.add((i, j))
    T = ShiftGraph(tuple(str(i) for i in range(len(verts))), frozenset(arrows))
    ess = essential_symbols(T)
    for i in sorted(ess):
        a, b, c = verts[i]
        if not rel.related(a, c):
            z = path_through(T, i, ess).map(verts.__getitem__)
            x, y, w = _unzip(z, 3)
            return TransitivityReport(False, (x, y, w), verts[i])
    return TransitivityReport(True)


# ---------------------------------------------------------------------------
# Bowen property


@dataclass
class BowenReport:
    passed: bool
    counterexample: tuple | None = None
    reason: str = ""
    tested_points: int = 0
    exact: bool = False
    factor: BowenFactor | None = None


DEFAULT_TAIL_PERIOD = 3
DEFAULT_CORE_BOUND = 2


def default_test_points(G: ShiftGraph, P: int, core_bound: int | None = None,
                        tail_period: int | None = None, all_shifts: bool = False) -> list[EPSequence]:
    """Periodic points of period <= P and heteroclinic points between orbits
    of period <= ``tail_period`` with cores of length <= ``core_bound``."""
    if core_bound is None:
        core_bound = min(2 * P, DEFAULT_CORE_BOUND)
    if tail_period is None:
        tail_period = min(P, DEFAULT_TAIL_PERIOD)
    pts = periodic_points_upto(G, P)
    return pts + heteroclinic_points(G, tail_period, core_bound, all_shifts)


def verify_bowen_property(f: BowenFactor, P: int, core_bound: int | None = None,
                          points: Sequence[EPSequence] | None = None,
                          tail_period: int | None = None) -> BowenReport:
    """Check ``pi(x) = pi(y) <=> x ~ y``.

    For one-block codes the answer is exact over all of ``X``: the surviving
    parts of the two pair graphs (equal images, related symbols) must agree.
    Explicit ``points`` are then also checked one by one, comparing the
    class of ``x`` with the fiber of ``pi(x)`` as pruned layers.  Other maps
    are checked pairwise on the test set only.
    """
    G = f.source
    rel = f.relation
    if f.is_one_block:
        pts = [] if points is None else list(points)
        pre = f.preimage_sets
        for x in pts:
            cls_layers = prune_layers(G, x.map(lambda s: frozenset(rel.neighbors(s))))
            fib_layers = prune_layers(G, f.image(x).map(pre.__getitem__))
            if cls_layers != fib_layers:
                n = _first_difference(cls_layers, fib_layers)
                extra = cls_layers[n] - fib_layers[n]
                layers, why = (cls_layers, "related but different images") if extra else \
                    (fib_layers, "equal images but not related")
                sym = min(extra or (fib_layers[n] - cls_layers[n]))
                return BowenReport(False, (x, _path_in_layers(G, layers, n, sym)), why, len(pts))
        code = f.code
        Pimg, vimg = pair_graph(G, lambda a, b: code[a] == code[b])
        Prel, vrel = pair_graph(G, rel.related)
        eimg = {vimg[i] for i in essential_symbols(Pimg)}
        erel = {vrel[i] for i in essential_symbols(Prel)}
        if eimg != erel:
            bad = sorted(eimg ^ erel)[0]
            graph, verts, ess = (Pimg, vimg, essential_symbols(Pimg)) if bad in eimg \
                else (Prel, vrel, essential_symbols(Prel))
            z = path_through(graph, verts.index(bad), ess).map(verts.__getitem__)
            x, y = _unzip(z, 2)
            why = "equal images but not related" if bad in eimg else "related but different images"
            return BowenReport(False, (x, y), why, len(pts), exact=True)
        return BowenReport(True, None, "", len(pts), exact=True, factor=replace(f, verified=True))
    # other maps need every placement of the test points
    pts = list(points) if points is not None else default_test_points(G, P, core_bound, tail_period,
                                                                      all_shifts=True)
    images = [f.image(x) for x in pts]
    for i, x in enumerate(pts):
        for j in range(i + 1, len(pts)):
            same = images[i] == images[j]
            if same != bowen_equivalent(x, pts[j], rel):
                why = "equal images but not related" if same else "related but different images"
                return BowenReport(False, (x, pts[j]), why, len(pts))
    return BowenReport(True, None, "", len(pts), factor=replace(f, verified=True))


def _path_in_layers(G: ShiftGraph, layers: EPSequence, n: int, sym: int) -> EPSequence:
    """A point through ``sym`` at time ``n`` inside pruned layers (least choices)."""

    def nxt(m, s):
        return min(b for b in G.succ[s] if b in ep_get(layers, m + 1))

    def prv(m, s):
        return min(b for b in G.pred[s] if b in ep_get(layers, m - 1))

    return ep_from_chase(n, sym, nxt, prv, layers.start, layers.end, len(layers.left), len(layers.right))


def _first_difference(a: EPSequence, b: EPSequence):
    lo = min(a.start, b.start) - len(a.left) * len(b.left)
    hi = max(a.end, b.end) + len(a.right) * len(b.right)
    for n in range(lo, hi + 1):
        if ep_get(a, n) != ep_get(b, n):
            return n
    return None


# ---------------------------------------------------------------------------
# resolving property and multiplicity bounds


@dataclass
class ResolvingReport:
    finite: bool
    R: int | None = None
    n_plus: int | None = None
    n_minus: int | None = None
    layers: tuple[frozenset[int], ...] = ()
    bijective: bool = False
    unique_successor: bool = False
    closed: bool = False

    @property
    def passed(self) -> bool:
        return self.finite and self.bijective and self.unique_successor and self.closed


def resolving_check(x: EPSequence, G: ShiftGraph, rel: SymRelation) -> ResolvingReport:
    """Check the layer bijections of a finite class over one common period."""
    res = class_of(x, G, rel)
    if not res.finite:
        return ResolvingReport(False)
    members = res.members
    period = 1
    for y in members:
        period = math.lcm(period, len(y.left), len(y.right))
    span = range(0, period + 1)
    layers = tuple(frozenset(y[n] for y in members) for n in span)
    bij = all(len(layers[k]) == len(members) for k in range(len(layers)))
    uniq = True
    for k in range(len(layers) - 1):
        for a in layers[k]:
            if sum(1 for b in layers[k + 1] if G.has_arrow(a, b)) != 1:
                uniq = False
    closed = all(set(class_of(y, G, rel).members) == set(members) for y in members)
    hi = max(y.end for y in members) + period
    lo = min(y.start for y in members) - period
    n_plus = len({y.window(0, max(hi, 1)) for y in members})
    n_minus = len({y.window(min(lo, 0), 1) for y in members})
    return ResolvingReport(True, len(layers[0]), n_plus, n_minus, layers[:-1], bij, uniq, closed)


def multiplicity_table(f: BowenFactor, P: int) -> dict[tuple[int, int], int]:
    """``C(a, b)``: largest fiber over periodic targets of period <= P having a
    preimage that sees ``a`` infinitely often in the past and ``b`` in the future."""
    table: dict[tuple[int, int], int] = {}
    for y in periodic_points_upto(f.target, P):
        res = fiber(y, f)
        if not res.finite:
            raise InputError("infinite fiber: factor is not finite-to-one")
        r = len(res.members)
        for x in res.members:
            for a in set(x.left):
                for b in set(x.right):
                    table[(a, b)] = max(table.get((a, b), 0), r)
    return table


def propagate_bound(C: dict[tuple[int, int], int], N: int,
                    subsets: Sequence[frozenset[int]] | None = None) -> dict:
    """``ceil(C(a, b)^N / N!)`` per pair, or the supremum over ``A x B`` for
    pairs of quotient symbols when ``subsets`` is given."""
    fact = math.factorial(N)

    def bound(c):
        return math.ceil(Fraction(c ** N, fact))

    if subsets is None:
        return {k: bound(c) for k, c in C.items()}
    out = {}
    for i, A in enumerate(subsets):
        for j, B in enumerate(subsets):
            vals = [C[(a, b)] for a in A for b in B if (a, b) in C]
            if vals:
                out[(i, j)] = bound(max(vals))
    return out
