"""Degree of a relation, magic words, transitions and special words.

``word_degree(w, i)`` counts the symbols that can sit at index ``i`` in a
word of the shift that is related to ``w`` letter by letter.  The degree of
the relation is the minimum of ``min_i word_degree(w, i)`` over words of
the recurrent language.  Words realizing it are *magic*.

:func:`rec_degree` finds the minimum with a subset automaton: reading a
word left to right, the set of symbols reachable at the current index by a
related word only shrinks, and likewise right to left.  Pairing a forward
state with a backward state at the same symbol gives the degree at that
index of the concatenated word.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from collections.abc import Sequence

from .relation import SymRelation, class_of
from .shiftcore import (
    EPSequence,
    InputError,
    ShiftGraph,
    close_up,
    essential_symbols,
    in_recurrent_language,
    is_admissible,
    iter_cycle_words,
    periodic_points_upto,
    scc_decompose,
)


def _layers(w: Sequence[int], rel: SymRelation, ess: frozenset[int]) -> list[set[int]]:
    return [{b for b in rel.neighbors(a) if b in ess} for a in w]


def _sweep(G: ShiftGraph, layers: list[set[int]]) -> list[set[int]]:
    """Keep symbols on a path through all layers."""
    n = len(layers)
    fwd = [set() for _ in range(n)]
    fwd[0] = set(layers[0])
    for j in range(1, n):
        fwd[j] = {b for b in layers[j] if any(a in fwd[j - 1] for a in G.pred[b])}
    bwd = [set() for _ in range(n)]
    bwd[-1] = set(layers[-1])
    for j in range(n - 2, -1, -1):
        bwd[j] = {a for a in layers[j] if any(b in bwd[j + 1] for b in G.succ[a])}
    return [fwd[j] & bwd[j] for j in range(n)]


def related_symbols(w: Sequence[int], G: ShiftGraph, rel: SymRelation,
                    ess: frozenset[int] | None = None) -> list[set[int]]:
    """``[{v_j : v in L(X), v ~ w} for j in range(len(w))]``."""
    ess = essential_symbols(G) if ess is None else ess
    if not w:
        return []
    return _sweep(G, _layers(w, rel, ess))


def word_degree(w: Sequence[int], i: int, G: ShiftGraph, rel: SymRelation,
                ess: frozenset[int] | None = None) -> int:
    if not 0 <= i < len(w):
        raise InputError("index outside the word")
    if not is_admissible(w, G):
        raise InputError("word is not admissible")
    return len(related_symbols(w, G, rel, ess)[i])


def word_degree_min(w: Sequence[int], G: ShiftGraph, rel: SymRelation,
                    ess: frozenset[int] | None = None) -> tuple[int, int]:
    """``(min_i word_degree(w, i), first index attaining it)``."""
    sets = related_symbols(w, G, rel, ess)
    best = min(range(len(w)), key=lambda i: (len(sets[i]), i))
    return len(sets[best]), best


@dataclass
class DegreeReport:
    degree: int
    word: tuple[int, ...]
    index: int
    search_bound: int
    attained: bool = True
    per_component: dict[int, int] = field(default_factory=dict)


def _bfs_states(G, rel, ess, comp, forward: bool):
    """Reachable (symbol, set) states of the subset automaton inside ``comp``
    with the shortest word reaching each."""
    words = {}
    queue = deque()
    for a in sorted(comp):
        st = (a, frozenset(b for b in rel.neighbors(a) if b in ess))
        if st not in words:
            words[st] = (a,)
            queue.append(st)
    while queue:
        a, S = queue.popleft()
        w = words[(a, S)]
        nbrs = G.succ[a] if forward else G.pred[a]
        for c in nbrs:
            if c not in comp:
                continue
            if forward:
                S2 = frozenset(b2 for b2 in rel.neighbors(c) if b2 in ess and any(G.has_arrow(b, b2) for b in S))
                w2 = w + (c,)
            else:
                S2 = frozenset(b2 for b2 in rel.neighbors(c) if b2 in ess and any(G.has_arrow(b2, b) for b in S))
                w2 = (c,) + w
            st = (c, S2)
            if st not in words:
                words[st] = w2
                queue.append(st)
    return words


def rec_degree(G: ShiftGraph, rel: SymRelation) -> DegreeReport:
    """Degree over the recurrent language, with a shortest magic couple."""
    dec = scc_decompose(G)
    comps = dec.nontrivial_components()
    if not comps:
        raise InputError("no recurrent words: degree undefined")
    ess = essential_symbols(G)
    best = None
    per = {}
    for k, comp in enumerate(dec.components):
        if not dec.nontrivial[k]:
            continue
        fwd = _bfs_states(G, rel, ess, comp, True)
        bwd = _bfs_states(G, rel, ess, comp, False)
        by_sym: dict[int, list] = {}
        for (a, B), w in bwd.items():
            by_sym.setdefault(a, []).append((B, w))
        comp_best = None
        for (a, F), pw in fwd.items():
            for B, sw in by_sym.get(a, ()):
                word = pw + sw[1:]
                key = (len(F & B), len(word), word, len(pw) - 1)
                if comp_best is None or key < comp_best:
                    comp_best = key
        per[k] = comp_best[0]
        if best is None or comp_best < best:
            best = comp_best
    d, length, word, index = best
    return DegreeReport(d, word, index, length, True, per)


def exhaustive_degree(G: ShiftGraph, rel: SymRelation, max_len: int,
                      exact_length: bool = False) -> int | None:
    """Minimum of ``word_degree_min`` over recurrent words of length <= max_len
    (or exactly ``max_len``), by brute force."""
    dec = scc_decompose(G)
    ess = essential_symbols(G)
    best = None
    for k, comp in enumerate(dec.components):
        if not dec.nontrivial[k]:
            continue
        stack = [(a,) for a in sorted(comp)]
        while stack:
            w = stack.pop()
            if not exact_length or len(w) == max_len:
                d = word_degree_min(w, G, rel, ess)[0]
                if best is None or d < best:
                    best = d
            if len(w) < max_len:
                stack.extend(w + (c,) for c in G.succ[w[-1]] if c in comp)
    return best


def is_magic(w: Sequence[int], G: ShiftGraph, rel: SymRelation, degree: int) -> bool:
    return in_recurrent_language(w, G) and word_degree_min(w, G, rel)[0] == degree


# ---------------------------------------------------------------------------
# periodic points and magic words


def _window_radius(x: EPSequence, rel: SymRelation) -> int:
    # the forward and backward subset sets along a periodic point shrink at
    # most max_degree times, once per period at most
    return max(rel.max_degree(), 1) * x.period + 1


def local_degrees(x: EPSequence, G: ShiftGraph, rel: SymRelation) -> list[int]:
    """For periodic ``x``: the minimum over windows centred at ``i`` of the degree
    at ``i``, for ``i`` in one period (exact by the shrinking-set bound)."""
    ess = essential_symbols(G)
    r = _window_radius(x, rel)
    return [len(related_symbols(x.window(i - r, i + r + 1), G, rel, ess)[r]) for i in range(x.period)]


def sees_magic(x: EPSequence, G: ShiftGraph, rel: SymRelation, degree: int) -> bool:
    """Whether the periodic point ``x`` contains a magic word."""
    return min(local_degrees(x, G, rel)) == degree


def shortest_magic_subword(x: EPSequence, G: ShiftGraph, rel: SymRelation,
                           degree: int) -> tuple[tuple[int, ...], int] | None:
    """Shortest (then leftmost in one period) magic subword of periodic ``x``
    and an index where it attains the degree."""
    ess = essential_symbols(G)
    r = _window_radius(x, rel)
    for length in range(1, 2 * r + 2):
        for s in range(x.period):
            w = x.window(s, s + length)
            d, i = word_degree_min(w, G, rel, ess)
            if d == degree:
                return w, i
    return None


# ---------------------------------------------------------------------------
# transitions


@dataclass(frozen=True)
class MagicCouple:
    word: tuple[int, ...]
    index: int
    symbols: tuple[int, ...]  # a_1 < ... < a_d

    @property
    def d(self) -> int:
        return len(self.symbols)


def magic_couple(W: Sequence[int], I: int, G: ShiftGraph, rel: SymRelation) -> MagicCouple:
    sets = related_symbols(W, G, rel)
    return MagicCouple(tuple(W), I, tuple(sorted(sets[I])))


def transitions(mc: MagicCouple, u: Sequence[int], i: int | None, j: int | None,
                G: ShiftGraph, rel: SymRelation) -> set[tuple[int, ...]]:
    """``T_ij(WuW)``; ``None`` for ``i`` or ``j`` takes the union over that index.

    Indices ``i, j`` run over ``0..d-1`` and select ``a_i, a_j``.
    """
    W, I = mc.word, mc.index
    full = tuple(W) + tuple(u) + tuple(W)
    if not in_recurrent_language(full, G):
        raise InputError("WuW is not in the recurrent language")
    ess = essential_symbols(G)
    layers = _layers(full, rel, ess)
    span = len(W) + len(u)
    if i is not None:
        layers[I] &= {mc.symbols[i]}
    else:
        layers[I] &= set(mc.symbols)
    if j is not None:
        layers[I + span] &= {mc.symbols[j]}
    else:
        layers[I + span] &= set(mc.symbols)
    alive = _sweep(G, layers)
    out = set()

    def dfs(pos, acc):
        if pos == I + span - 1:
            if any(G.has_arrow(acc[-1], b) for b in alive[I + span]):
                out.add(tuple(acc))
            return
        for b in sorted(alive[pos + 1]):
            if G.has_arrow(acc[-1], b):
                dfs(pos + 1, acc + [b])

    for a in sorted(alive[I]):
        dfs(I, [a])
    return out


def concat_transitions(T1: set, T2: set) -> set:
    return {t1 + t2 for t1 in T1 for t2 in T2}


def is_special(u: Sequence[int], mc: MagicCouple, G: ShiftGraph, rel: SymRelation) -> bool:
    return any(len(transitions(mc, u, i, None, G, rel)) >= 2 for i in range(mc.d))


def block_decomposition(x: EPSequence, W: Sequence[int]) -> list[tuple[int, ...]]:
    """Fillers ``u^k`` of one period of a greedy ``... W u W u' W ...``
    decomposition of the periodic point ``x``."""
    W = tuple(W)
    p = x.period
    occ = [s for s in range(p) if x.window(s, s + len(W)) == W]
    if not occ:
        raise InputError("the periodic point does not contain the word")
    pos = occ[0]
    starts = []
    seen = {}
    while pos % p not in seen:
        seen[pos % p] = len(starts)
        starts.append(pos)
        nxt = pos + len(W)
        while x.window(nxt, nxt + len(W)) != W:
            nxt += 1
        pos = nxt
    k0 = seen[pos % p]
    cyc = starts[k0:] + [pos]
    return [x.window(a + len(W), b) for a, b in zip(cyc, cyc[1:])]


def class_size_lower_bound(x: EPSequence, mc: MagicCouple, G: ShiftGraph, rel: SymRelation) -> float:
    """``K + d`` where ``K`` counts special fillers; a special filler in a
    periodic point recurs, so ``K`` is then infinite."""
    fillers = block_decomposition(x, mc.word)
    K = math.inf if any(is_special(u, mc, G, rel) for u in fillers) else 0
    return K + mc.d


# ---------------------------------------------------------------------------
# theorem check


@dataclass
class DegreeCheck:
    degree: int
    rows: list[tuple[EPSequence, int | None, bool]]  # (x, class size or None, sees magic)
    failures: list[EPSequence]
    min_class: int | None
    lower_bound_failures: list[EPSequence]

    @property
    def passed(self) -> bool:
        return not self.failures and not self.lower_bound_failures and self.min_class == self.degree


def verify_thm_degree(G: ShiftGraph, rel: SymRelation, P: int) -> DegreeCheck:
    """For periodic points of period <= P with finite class, check that the
    class has ``degree`` elements iff the point sees a magic word, that the
    class is never smaller than the local degree, and that the smallest
    class equals the degree."""
    rep = rec_degree(G, rel)
    d = rep.degree
    pts = periodic_points_upto(G, P)
    magic_cycle = close_up(rep.word, G)
    extra = EPSequence.periodic(magic_cycle)
    if extra not in pts:
        pts.append(extra)
    rows, fails, lb_fails = [], [], []
    sizes = []
    for x in pts:
        res = class_of(x, G, rel)
        local = local_degrees(x, G, rel)
        sees = min(local) == d
        if res.finite:
            size = len(res.members)
            sizes.append(size)
            if (size == d) != sees:
                fails.append(x)
            if size < min(local):
                lb_fails.append(x)
            rows.append((x, size, sees))
        else:
            rows.append((x, None, sees))
    return DegreeCheck(d, rows, fails, min(sizes) if sizes else None, lb_fails)
