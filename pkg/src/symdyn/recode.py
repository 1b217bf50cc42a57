"""Recoding tools: poset enumeration, higher blocks and loop graphs.

A loop graph at a base word ``W`` of length ``N`` is built on the ``N``th
higher block presentation.  A first-return loop is an ``X``-word ``z`` of
length ``k`` whose extension ``zW`` starts with ``W``, ends with ``W`` and
has no other occurrence of ``W``.  The loop graph has a vertex ``(z, l)``
for each ``0 <= l < k`` and is mapped back by ``(z, l) -> z[l]``.

Only loops of length ``<= Lmax`` are built.  A periodic point of period
``n`` seeing ``W`` splits into first-return loops of length ``<= n``, so the
truncated graph is exact for periodic points of period ``<= Lmax``.
"""
from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from itertools import islice

from .shiftcore import (
    EPSequence,
    InputError,
    ShiftGraph,
    ep_shift,
    ep_zip,
    is_admissible,
    is_subword,
    iter_cycle_words,
    occurs_cyclically,
    periodic_points_upto,
)


# ---------------------------------------------------------------------------
# posets


class PosetError(InputError):
    """An initial segment is infinite (or exceeds the budget)."""


def poset_enumerate(elements: Iterable, leq: Callable[[object, object], bool],
                    predecessors: Callable[[object], Iterable] | None = None,
                    limit: int | None = None, budget: int = 100_000) -> list:
    """Enumerate ``elements`` so that ``leq(e_i, e_j)`` implies ``i <= j``.

    Finite input: repeatedly take the first minimal element left, in input
    order.  Streamed input (``predecessors`` given): for each element in
    input order, first emit its not yet emitted predecessors (itself
    included) in the finite order; ``limit`` bounds how many input elements
    are consumed and ``budget`` bounds each initial segment.
    """
    if predecessors is None:
        rest = list(elements)
        out = []
        while rest:
            for i, a in enumerate(rest):
                if not any(leq(b, a) and b != a for b in rest):
                    out.append(a)
                    del rest[i]
                    break
            else:  # pragma: no cover - impossible for a partial order
                raise PosetError("relation is not a partial order")
        return out
    out: list = []
    done: set = set()
    stream = elements if limit is None else islice(elements, limit)
    for a in stream:
        seg = []
        for b in predecessors(a):
            if len(seg) >= budget:
                raise PosetError("initial segment exceeds the budget")
            if b not in done:
                seg.append(b)
        if a not in done and a not in seg:
            seg.append(a)
        for b in poset_enumerate(seg, leq):
            done.add(b)
            out.append(b)
    return out


def subword_leq(a: Sequence, b: Sequence) -> bool:
    return is_subword(a, b)


# ---------------------------------------------------------------------------
# higher blocks


@dataclass(frozen=True)
class HigherBlock:
    base: ShiftGraph
    N: int
    graph: ShiftGraph
    words: tuple[tuple[int, ...], ...]

    @property
    def code(self) -> tuple[int, ...]:
        """One-block code to the base shift (first symbol)."""
        return tuple(w[0] for w in self.words)

    def forward(self, z: EPSequence) -> EPSequence:
        return z.map(lambda i: self.words[i][0])

    def inverse(self, x: EPSequence) -> EPSequence:
        """Window map ``x -> (x[n:n+N])_n``."""
        index = {w: i for i, w in enumerate(self.words)}
        return ep_zip(lambda *s: index[tuple(s)], *(ep_shift(x, k) for k in range(self.N)))


def admissible_words(G: ShiftGraph, n: int) -> list[tuple[int, ...]]:
    out = []

    def rec(w):
        if len(w) == n:
            out.append(tuple(w))
            return
        for b in G.succ[w[-1]]:
            w.append(b)
            rec(w)
            w.pop()

    if n == 0:
        return [()]
    for a in range(G.size):
        rec([a])
    return out


def higher_block(G: ShiftGraph, N: int) -> HigherBlock:
    if N < 1:
        raise InputError("block length must be positive")
    words = admissible_words(G, N)
    index = {w: i for i, w in enumerate(words)}
    arrows = set()
    for w in words:
        for b in G.succ[w[-1]]:
            arrows.add((index[w], index[w[1:] + (b,)]))
    labels = tuple(G.render(w, "") if all(len(l) == 1 for l in G.labels) else ".".join(G.labels[s] for s in w)
                   for w in words)
    return HigherBlock(G, N, ShiftGraph(labels, frozenset(arrows)), tuple(words))


# ---------------------------------------------------------------------------
# loop graphs


def first_return_loops(G: ShiftGraph, W: Sequence[int], Lmax: int) -> tuple[list[tuple[int, ...]], bool]:
    """First-return loops at ``W`` of length <= Lmax in order of length then
    lexicographic; the flag tells whether longer loops exist."""
    W = tuple(W)
    N = len(W)
    loops: list[tuple[int, ...]] = []
    longer = False
    # grow the extension e = z W; position k is where W reappears
    stack: list[tuple[int, ...]] = [W]
    while stack:
        e = stack.pop()
        k = len(e) - N  # candidate loop length if e ends with W
        if k >= 1 and e[-N:] == W:
            loops.append(e[:k])
            continue
        if k >= Lmax:
            # e has length Lmax + N without a return; more loops exist iff it extends
            longer = longer or bool(G.succ[e[-1]])
            continue
        # extensions stop as soon as W reappears, so returns are first returns
        for b in sorted(G.succ[e[-1]], reverse=True):
            stack.append(e + (b,))
    loops.sort(key=lambda z: (len(z), z))
    return loops, longer


@dataclass
class LoopGraphShift:
    """Loop graph at ``W`` (good loops only) with its one-block code."""

    base: ShiftGraph
    word: tuple[int, ...]
    forbidden: tuple[tuple[int, ...], ...]
    Lmax: int
    loops: list[tuple[int, ...]]
    graph: ShiftGraph
    vertices: list[tuple[int, int]]  # (loop index, l)
    code: tuple[int, ...]
    truncated: bool
    dropped: list[tuple[int, ...]] = field(default_factory=list)

    def loop_length(self, vertex: int) -> int:
        return len(self.loops[self.vertices[vertex][0]])

    def image(self, s: EPSequence) -> EPSequence:
        return s.map(self.code.__getitem__)

    def lift(self, x: EPSequence) -> EPSequence:
        """The unique preimage of a point seeing ``W`` i.o. (its loop decomposition)."""
        W = self.word
        N = len(W)
        index = {v: i for i, v in enumerate(self.vertices)}
        loop_index = {z: i for i, z in enumerate(self.loops)}

        def at(n):
            m = n
            while x.window(m, m + N) != W:
                m -= 1
                if n - m > self.Lmax:
                    raise InputError("point does not see the base word within the truncation")
            k = n + 1
            while x.window(k, k + N) != W:
                k += 1
                if k - m > self.Lmax:
                    raise InputError("loop longer than the truncation")
            z = x.window(m, k)
            if z not in loop_index:
                raise InputError("point uses a loop that is not good")
            return index[(loop_index[z], n - m)]

        lo, hi = x.start - self.Lmax - N, x.end + self.Lmax + N
        p, q = len(x.left), len(x.right)
        left = tuple(at(n) for n in range(lo - p * self.Lmax, lo))
        core = tuple(at(n) for n in range(lo, hi))
        right = tuple(at(n) for n in range(hi, hi + q * self.Lmax))
        return EPSequence(left, core, right, lo)


def build_loop_graph(G: ShiftGraph, W: Sequence[int], forbidden: Sequence[Sequence[int]] = (),
                     Lmax: int = 8, tag: str = "") -> LoopGraphShift:
    W = tuple(W)
    if not W or not is_admissible(W, G):
        raise InputError("base word is not admissible")
    if Lmax < len(W):
        raise InputError("loop bound must be at least the word length")
    forbidden = tuple(tuple(f) for f in forbidden)
    loops, longer = first_return_loops(G, W, Lmax)
    good, dropped = [], []
    for z in loops:
        ext = z + W
        (dropped if any(is_subword(f, ext) for f in forbidden) else good).append(z)
    vertices = [(i, l) for i, z in enumerate(good) for l in range(len(z))]
    index = {v: n for n, v in enumerate(vertices)}
    arrows = set()
    for i, z in enumerate(good):
        for l in range(len(z) - 1):
            arrows.add((index[(i, l)], index[(i, l + 1)]))
        for j in range(len(good)):
            arrows.add((index[(i, len(z) - 1)], index[(j, 0)]))
    labels = tuple(f"{tag}{i}.{l}" for i, l in vertices)
    code = tuple(good[i][l] for i, l in vertices)
    return LoopGraphShift(G, W, forbidden, Lmax, good, ShiftGraph(labels, frozenset(arrows)),
                          vertices, code, longer, dropped)


@dataclass
class MagicSubsetCode:
    """Disjoint union of loop graphs with the combined one-block code."""

    base: ShiftGraph
    words: list[tuple[int, ...]]
    parts: list[LoopGraphShift]
    graph: ShiftGraph
    code: tuple[int, ...]
    offsets: list[int]
    warnings: list[str]

    def part_of(self, vertex: int) -> int:
        k = 0
        while k + 1 < len(self.offsets) and self.offsets[k + 1] <= vertex:
            k += 1
        return k

    def image(self, s: EPSequence) -> EPSequence:
        return s.map(self.code.__getitem__)


def disjoint_union(graphs: Sequence[ShiftGraph], tags: Sequence[str] | None = None) -> tuple[ShiftGraph, list[int]]:
    labels, arrows, offsets = [], set(), []
    off = 0
    for k, g in enumerate(graphs):
        offsets.append(off)
        t = tags[k] if tags else f"{k}:"
        labels.extend(f"{t}{lab}" for lab in g.labels)
        arrows.update((a + off, b + off) for a, b in g.arrows)
        off += g.size
    return ShiftGraph(tuple(labels), frozenset(arrows)), offsets


def magic_subset_code(G: ShiftGraph, words: Sequence[Sequence[int]], Lmax: int) -> MagicSubsetCode:
    """Injective one-block code onto the points seeing some listed word i.o.

    The words are reordered so that subwords come first; part ``i`` uses
    good loops at ``W^i`` avoiding ``W^1 .. W^(i-1)``.
    """
    if not words:
        raise InputError("word list is empty")
    ws = []
    for w in words:
        w = tuple(w)
        if not is_admissible(w, G) or not w:
            raise InputError("listed word is not admissible")
        if w not in ws:
            ws.append(w)
    order = poset_enumerate(ws, subword_leq)
    parts = []
    warnings = []
    for i, w in enumerate(order):
        part = build_loop_graph(G, w, order[:i], Lmax, tag="")
        if part.truncated:
            warnings.append(f"loops at word {i} longer than {Lmax} were not built")
        parts.append(part)
    graph, offsets = disjoint_union([p.graph for p in parts], [f"W{i}:" for i in range(len(parts))])
    code = tuple(c for p in parts for c in p.code)
    return MagicSubsetCode(G, order, parts, graph, code, offsets, warnings)


def sees_word_periodic(x: EPSequence, w: Sequence[int]) -> bool:
    return occurs_cyclically(w, x.right)


# ---------------------------------------------------------------------------
# locally compact recoding


@dataclass
class LocallyCompactShift:
    loop_graph: LoopGraphShift
    Lmax: int
    rule: str
    vertices: list[tuple[int, int, int]]  # (S vertex, L-, L+)
    graph: ShiftGraph
    index: dict

    def q_vertex(self, t: int) -> int:
        return self.vertices[t][0]

    def q(self, z: EPSequence) -> EPSequence:
        return z.map(self.q_vertex)

    def out_bound(self, t: int) -> int:
        """Bound on the out-degree from the finitely many choices of the
        successor's parameters."""
        S = self.loop_graph
        s, Lm, Lp = self.vertices[t]
        total = 0
        for w in S.graph.succ[s]:
            lw = S.loop_length(w)
            if lw <= Lp + 1:
                total += Lp + 2 - lw
        return total

    def in_bound(self, t: int) -> int:
        S = self.loop_graph
        s, Lm, Lp = self.vertices[t]
        total = 0
        for w in S.graph.pred[s]:
            lw = S.loop_length(w)
            if lw <= Lm + 1:
                total += Lm + 2 - lw
        return total

    def iota(self, x: EPSequence) -> EPSequence:
        """Canonical lift: attach ``L-^n = max_k |v^(n-k)| - k`` and
        ``L+^n = max_k |v^(n+k)| - k``."""
        S = self.loop_graph
        B = self.Lmax

        def lengths(n):
            return S.loop_length(x[n])

        def at(n):
            Lm = max(lengths(n - k) - k for k in range(B + 1))
            Lp = max(lengths(n + k) - k for k in range(B + 1))
            key = (x[n], Lm, Lp)
            if key not in self.index:
                raise InputError("sequence is not flat within the truncation")
            return self.index[key]

        lo, hi = x.start - B, x.end + B
        p, q = len(x.left), len(x.right)
        return EPSequence(tuple(at(n) for n in range(lo - p, lo)),
                          tuple(at(n) for n in range(lo, hi)),
                          tuple(at(n) for n in range(hi, hi + q)), lo)


def _arrow_ok(rule: str, lv: int, lw: int, Lm: int, Lp: int, Mm: int, Mp: int) -> bool:
    if rule == "consistent":
        return Mm == max(lw, Lm - 1) and Lp == max(lv, Mp - 1)
    if rule == "printed":
        return Mm == max(lv, Lm - 1) and Lp == max(lw, Mp - 1)
    raise InputError(f"unknown arrow rule {rule!r}")


def locally_compact_recode(S: LoopGraphShift, Lmax: int | None = None,
                           rule: str = "consistent") -> LocallyCompactShift:
    """Attach look-back/look-ahead lengths to a loop graph.

    Vertices are ``(s, L-, L+)`` with ``|v(s)| <= min(L-, L+)`` and both
    bounds at most ``Lmax``.  ``rule="consistent"`` links them so that the
    canonical lift is a path; ``rule="printed"`` swaps the loop whose
    length enters each maximum.
    """
    B = S.Lmax if Lmax is None else Lmax
    verts = []
    for s in range(S.graph.size):
        lv = S.loop_length(s)
        for Lm in range(lv, B + 1):
            for Lp in range(lv, B + 1):
                verts.append((s, Lm, Lp))
    index = {v: i for i, v in enumerate(verts)}
    by_s: dict[int, list[int]] = {}
    for i, (s, _, _) in enumerate(verts):
        by_s.setdefault(s, []).append(i)
    arrows = set()
    for i, (s, Lm, Lp) in enumerate(verts):
        lv = S.loop_length(s)
        for w in S.graph.succ[s]:
            lw = S.loop_length(w)
            for j in by_s[w]:
                _, Mm, Mp = verts[j]
                if _arrow_ok(rule, lv, lw, Lm, Lp, Mm, Mp):
                    arrows.add((i, j))
    labels = tuple(f"{S.graph.labels[s]}|{Lm}|{Lp}" for s, Lm, Lp in verts)
    return LocallyCompactShift(S, B, rule, verts, ShiftGraph(labels, frozenset(arrows)), index)
