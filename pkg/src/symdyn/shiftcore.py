"""Graphs, words and eventually periodic sequences.

A Markov shift is given by a simple directed graph on a finite alphabet.
Symbols are dense integer ids ``0..n-1``; labels are only for display and
parsing.  Words are plain tuples of ids.  Points of the shift are
represented by :class:`EPSequence`, an eventually periodic bi-infinite
sequence kept in a unique canonical form so that ``==`` decides equality
of points.
"""
from __future__ import annotations

import math
from collections.abc import Hashable, Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx

Word = tuple  # tuple of symbol ids (or any hashable symbols)


class InputError(ValueError):
    """Raised on malformed input (unknown symbols, inadmissible words, ...)."""


# ---------------------------------------------------------------------------
# words


def primitive_root(word: Sequence) -> tuple:
    """Shortest ``r`` with ``word == r * k``."""
    w = tuple(word)
    n = len(w)
    for d in range(1, n + 1):
        if n % d == 0 and w[:d] * (n // d) == w:
            return w[:d]
    return w


def is_subword(small: Sequence, big: Sequence) -> bool:
    s, b = tuple(small), tuple(big)
    m = len(s)
    if m == 0:
        return True
    return any(b[i:i + m] == s for i in range(len(b) - m + 1))


def occurs_cyclically(small: Sequence, cycle: Sequence) -> bool:
    """True iff ``small`` occurs in the bi-infinite repetition of ``cycle``."""
    s, c = tuple(small), tuple(cycle)
    if not s:
        return True
    if not c:
        return False
    reps = len(s) // len(c) + 2
    return is_subword(s, c * reps)


# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class ShiftGraph:
    """Simple directed graph presenting a Markov shift.

    ``labels[i]`` names symbol ``i``; ``arrows`` is a set of ``(i, j)`` pairs.
    Parallel arrows cannot be expressed, so the graph is simple by
    construction.
    """

    labels: tuple[str, ...]
    arrows: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        object.__setattr__(self, "arrows", frozenset((int(a), int(b)) for a, b in self.arrows))
        n = len(self.labels)
        if len(set(self.labels)) != n:
            raise InputError("symbol labels must be unique")
        for a, b in self.arrows:
            if not (0 <= a < n and 0 <= b < n):
                raise InputError(f"arrow ({a}, {b}) uses an unknown symbol")

    @classmethod
    def from_labels(cls, labels: Iterable, arrows: Iterable[tuple]) -> "ShiftGraph":
        labels = tuple(str(x) for x in labels)
        index = {lab: i for i, lab in enumerate(labels)}
        try:
            arr = frozenset((index[str(a)], index[str(b)]) for a, b in arrows)
        except KeyError as exc:
            raise InputError(f"unknown symbol {exc.args[0]!r}") from None
        return cls(labels, arr)

    @classmethod
    def full_shift(cls, n: int, labels: Iterable | None = None) -> "ShiftGraph":
        labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
        return cls(labels, frozenset((a, b) for a in range(n) for b in range(n)))

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    @cached_property
    def succ(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.labels]
        for a, b in self.arrows:
            out[a].append(b)
        return tuple(tuple(sorted(x)) for x in out)

    @cached_property
    def pred(self) -> tuple[tuple[int, ...], ...]:
        inn: list[list[int]] = [[] for _ in self.labels]
        for a, b in self.arrows:
            inn[b].append(a)
        return tuple(tuple(sorted(x)) for x in inn)

    @cached_property
    def index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def has_arrow(self, a: int, b: int) -> bool:
        return (a, b) in self.arrows

    def symbol(self, label) -> int:
        try:
            return self.index[str(label)]
        except KeyError:
            raise InputError(f"unknown symbol {label!r}") from None

    def word(self, labels: Iterable) -> tuple[int, ...]:
        """Convert labels to a word of ids.  A plain string of one-character
        labels is accepted when every label is a single character."""
        if isinstance(labels, str) and all(len(lab) == 1 for lab in self.labels):
            labels = list(labels)
        return tuple(self.symbol(x) for x in labels)

    def render(self, word: Iterable[int], sep: str = "") -> str:
        return sep.join(self.labels[s] for s in word)

    def adjacency(self) -> list[list[int]]:
        n = self.size
        mat = [[0] * n for _ in range(n)]
        for a, b in self.arrows:
            mat[a][b] = 1
        return mat

    def restrict(self, keep: Iterable[int]) -> tuple["ShiftGraph", dict[int, int]]:
        """Induced subgraph on ``keep``; returns the graph and the old->new id map."""
        kept = sorted(set(keep))
        remap = {old: new for new, old in enumerate(kept)}
        arrows = frozenset((remap[a], remap[b]) for a, b in self.arrows if a in remap and b in remap)
        return ShiftGraph(tuple(self.labels[i] for i in kept), arrows), remap

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.size))
        g.add_edges_from(self.arrows)
        return g

    def to_dot(self, name: str = "G") -> str:
        lines = [f"digraph {name} {{"]
        for i, lab in enumerate(self.labels):
            lines.append(f'  n{i} [label="{lab}"];')
        for a, b in sorted(self.arrows):
            lines.append(f"  n{a} -> n{b};")
        lines.append("}")
        return "\n".join(lines)


def essential_symbols(G: ShiftGraph, within: Iterable[int] | None = None) -> frozenset[int]:
    """Symbols lying on a bi-infinite path (optionally inside ``within``).

    Iteratively strips vertices without a successor or predecessor.
    """
    alive = set(range(G.size)) if within is None else set(within)
    out_deg = {a: sum(1 for b in G.succ[a] if b in alive) for a in alive}
    in_deg = {a: sum(1 for b in G.pred[a] if b in alive) for a in alive}
    stack = [a for a in alive if out_deg[a] == 0 or in_deg[a] == 0]
    while stack:
        a = stack.pop()
        if a not in alive:
            continue
        alive.discard(a)
        for b in G.succ[a]:
            if b in alive:
                in_deg[b] -= 1
                if in_deg[b] == 0:
                    stack.append(b)
        for b in G.pred[a]:
            if b in alive:
                out_deg[b] -= 1
                if out_deg[b] == 0:
                    stack.append(b)
    return frozenset(alive)


def essentialize(G: ShiftGraph) -> ShiftGraph:
    """Keep only symbols occurring in the shift (may return the empty graph)."""
    return G.restrict(essential_symbols(G))[0]


# ---------------------------------------------------------------------------
# strongly connected components


@dataclass(frozen=True)
class ComponentDecomposition:
    components: tuple[frozenset[int], ...]
    nontrivial: tuple[bool, ...]
    dag: frozenset[tuple[int, int]]  # edges between component indices
    periods: tuple[int, ...]  # 0 for trivial components
    component_of: tuple[int, ...]

    def nontrivial_components(self) -> list[frozenset[int]]:
        return [c for c, nt in zip(self.components, self.nontrivial) if nt]


def _period(G: ShiftGraph, comp: frozenset[int]) -> int:
    root = min(comp)
    level = {root: 0}
    queue = [root]
    g = 0
    for a in queue:
        for b in G.succ[a]:
            if b not in comp:
                continue
            if b not in level:
                level[b] = level[a] + 1
                queue.append(b)
            else:
                g = math.gcd(g, level[a] + 1 - level[b])
    return abs(g)


def scc_decompose(G: ShiftGraph) -> ComponentDecomposition:
    """SCCs in increasing order of their least symbol, with periods."""
    comps = sorted((frozenset(c) for c in nx.strongly_connected_components(G.to_networkx())), key=min)
    comp_of = [0] * G.size
    for k, c in enumerate(comps):
        for a in c:
            comp_of[a] = k
    nontrivial = tuple(len(c) > 1 or G.has_arrow(next(iter(c)), next(iter(c))) for c in comps)
    dag = frozenset(
        (comp_of[a], comp_of[b]) for a, b in G.arrows if comp_of[a] != comp_of[b]
    )
    periods = tuple(_period(G, c) if nt else 0 for c, nt in zip(comps, nontrivial))
    return ComponentDecomposition(tuple(comps), nontrivial, dag, periods, tuple(comp_of))


def is_irreducible(G: ShiftGraph) -> bool:
    dec = scc_decompose(G)
    return G.size > 0 and len(dec.components) == 1 and dec.nontrivial[0]


# ---------------------------------------------------------------------------
# words in the shift


def is_admissible(w: Sequence[int], G: ShiftGraph) -> bool:
    for s in w:
        if not (isinstance(s, int) and 0 <= s < G.size):
            raise InputError(f"unknown symbol {s!r}")
    return all(G.has_arrow(a, b) for a, b in zip(w, w[1:]))


def in_recurrent_language(w: Sequence[int], G: ShiftGraph) -> bool:
    """Membership in the language of the word-recurrent points.

    A word occurs in a word-recurrent point iff it is a path inside a
    single nontrivial strongly connected component.
    """
    if not is_admissible(w, G):
        return False
    dec = scc_decompose(G)
    if not w:
        return any(dec.nontrivial)
    k = dec.component_of[w[0]]
    return dec.nontrivial[k] and all(dec.component_of[s] == k for s in w)


def close_up(w: Sequence[int], G: ShiftGraph) -> tuple[int, ...]:
    """A cycle word having ``w`` as a prefix (``w`` in the recurrent language)."""
    if not w or not in_recurrent_language(w, G):
        raise InputError("word is not in the recurrent language")
    dec = scc_decompose(G)
    comp = dec.components[dec.component_of[w[0]]]
    best = None
    for s in G.succ[w[-1]]:
        if s in comp:
            path = _bfs_path(G, s, w[0], comp)
            if best is None or len(path) < len(best):
                best = path
    return tuple(w) + tuple(best[:-1])


def _bfs_path(G: ShiftGraph, src: int, dst: int, within) -> list[int]:
    prev = {src: None}
    queue = [src]
    for a in queue:
        if a == dst:
            break
        for b in G.succ[a]:
            if b in within and b not in prev:
                prev[b] = a
                queue.append(b)
    path = []
    node = dst
    while node is not None:
        path.append(node)
        node = prev[node]
    return path[::-1]


# ---------------------------------------------------------------------------
# eventually periodic sequences


@dataclass(frozen=True)
class EPSequence:
    """Eventually periodic bi-infinite sequence ``... u u | c | v v ...``.

    ``start`` is the index of the first core symbol (of the first right
    period symbol if the core is empty).  For ``n < start`` the value is
    ``left[(n - start) % len(left)]``; for ``n >= start + len(core)`` it is
    ``right[(n - start - len(core)) % len(right)]``.

    Construction always canonicalizes: both periods are primitive, the core
    is as short as possible and, for a globally periodic sequence, the core
    is empty, ``left == right`` and ``start == 0``.  Hence ``==`` is
    equality of sequences.  Symbols may be any hashable values.
    """

    left: tuple
    core: tuple
    right: tuple
    start: int = 0

    def __post_init__(self):
        u, c, v, s = tuple(self.left), tuple(self.core), tuple(self.right), int(self.start)
        if not u or not v:
            raise InputError("periodic parts must be nonempty")
        u, c, v, s = _canonical(u, c, v, s)
        object.__setattr__(self, "left", u)
        object.__setattr__(self, "core", c)
        object.__setattr__(self, "right", v)
        object.__setattr__(self, "start", s)

    @classmethod
    def periodic(cls, word: Sequence) -> "EPSequence":
        """The point ``x`` with ``x[0:len(word)] == word`` and period ``len(word)``."""
        w = tuple(word)
        return cls(w, (), w, 0)

    @property
    def end(self) -> int:
        """First index of the right periodic region."""
        return self.start + len(self.core)

    @property
    def is_periodic(self) -> bool:
        return not self.core and self.start == 0 and self.left == self.right

    @property
    def period(self) -> int:
        if not self.is_periodic:
            raise InputError("sequence is not periodic")
        return len(self.right)

    def __getitem__(self, n: int):
        return ep_get(self, n)

    def window(self, lo: int, hi: int) -> tuple:
        """``x[lo:hi]`` as a tuple."""
        return tuple(ep_get(self, n) for n in range(lo, hi))

    def map(self, fn) -> "EPSequence":
        """Apply ``fn`` symbolwise (a one-block code)."""
        return EPSequence(tuple(map(fn, self.left)), tuple(map(fn, self.core)),
                          tuple(map(fn, self.right)), self.start)

    def symbols(self) -> frozenset:
        return frozenset(self.left) | frozenset(self.core) | frozenset(self.right)

    def is_valid_in(self, G: ShiftGraph) -> bool:
        """All transitions of the sequence are arrows of ``G``."""
        lo = self.start - len(self.left)
        hi = self.end + len(self.right) + 1
        for s in self.symbols():
            if not (isinstance(s, int) and 0 <= s < G.size):
                return False
        return all(G.has_arrow(ep_get(self, n), ep_get(self, n + 1)) for n in range(lo, hi))

    def render(self, G: ShiftGraph | None = None) -> str:
        def fmt(w):
            if G is None:
                return " ".join(str(s) for s in w)
            return " ".join(G.labels[s] for s in w)
        if self.is_periodic:
            return f"({fmt(self.right)})^inf"
        return f"({fmt(self.left)})^inf [{self.start}] {fmt(self.core)} | ({fmt(self.right)})^inf"

    def to_json(self) -> dict:
        return {"left": list(self.left), "core": list(self.core),
                "right": list(self.right), "start": self.start}


def _canonical(u: tuple, c: tuple, v: tuple, s: int):
    u = primitive_root(u)
    v = primitive_root(v)
    r0 = s + len(c)

    def raw(n):
        if n < s:
            return u[(n - s) % len(u)]
        if n < r0:
            return c[n - s]
        return v[(n - r0) % len(v)]

    span = len(u) * len(v)
    # smallest R such that x agrees with the right pattern from R on
    right_end = r0
    periodic = False
    while raw(right_end - 1) == v[(right_end - 1 - r0) % len(v)]:
        right_end -= 1
        if right_end <= s - span:
            periodic = True
            break
    if periodic:
        p = len(v)
        w = tuple(v[(n - r0) % p] for n in range(p))
        return w, (), w, 0
    left_end = s - 1
    while raw(left_end + 1) == u[(left_end + 1 - s) % len(u)]:
        left_end += 1
        if left_end >= r0 + span:  # pragma: no cover - implied by the right scan
            p = len(u)
            w = tuple(u[(n - s) % p] for n in range(p))
            return w, (), w, 0
    new_start = min(left_end + 1, right_end)
    core = tuple(raw(n) for n in range(new_start, right_end))
    new_u = tuple(u[(new_start - len(u) + j - s) % len(u)] for j in range(len(u)))
    new_v = tuple(v[(right_end + j - r0) % len(v)] for j in range(len(v)))
    return new_u, core, new_v, new_start


def ep_get(x: EPSequence, n: int):
    if n < x.start:
        return x.left[(n - x.start) % len(x.left)]
    if n < x.end:
        return x.core[n - x.start]
    return x.right[(n - x.end) % len(x.right)]


def ep_shift(x: EPSequence, k: int) -> EPSequence:
    """``sigma^k x``, i.e. ``(sigma^k x)[n] == x[n + k]``."""
    return EPSequence(x.left, x.core, x.right, x.start - k)


def ep_equal(x: EPSequence, y: EPSequence) -> bool:
    return x == y


def ep_canonicalize(x: EPSequence) -> EPSequence:
    return EPSequence(x.left, x.core, x.right, x.start)


def ep_from_parts(left: Sequence, core: Sequence, right: Sequence, start: int = 0) -> EPSequence:
    return EPSequence(tuple(left), tuple(core), tuple(right), start)


def word_recurrence_bound(x: EPSequence) -> int:
    return len(x.core) + 2 * len(x.left) + 2 * len(x.right)


def is_word_recurrent(x: EPSequence) -> bool:
    """Every word occurring in ``x`` occurs infinitely often in both tails.

    Checks every window of length ``|c| + 2|u| + 2|v|`` meeting the core
    region against both tail cycles.
    """
    B = word_recurrence_bound(x)
    for lo in range(x.start - B, x.end + 1):
        w = x.window(lo, lo + B)
        if not (occurs_cyclically(w, x.left) and occurs_cyclically(w, x.right)):
            return False
    return True


def enumerate_periodic(G: ShiftGraph, n: int, minimal: bool = False) -> list[EPSequence]:
    """Points ``x`` with ``sigma^n x = x`` in lexicographic order of ``x[0:n]``."""
    if n < 1:
        raise InputError("period must be positive")
    return [EPSequence.periodic(w) for w in iter_cycle_words(G, n, minimal)]


def iter_cycle_words(G: ShiftGraph, n: int, minimal: bool = False,
                     within: frozenset[int] | None = None) -> Iterator[tuple[int, ...]]:
    """Closed walks ``w`` of length ``n`` (``w[-1] -> w[0]``), lexicographically."""
    allowed = within if within is not None else range(G.size)
    allowed_set = set(allowed)
    path: list[int] = []

    def rec():
        if len(path) == n:
            if G.has_arrow(path[-1], path[0]):
                w = tuple(path)
                if not minimal or len(primitive_root(w)) == n:
                    yield w
            return
        for b in G.succ[path[-1]]:
            if b in allowed_set:
                path.append(b)
                yield from rec()
                path.pop()

    for a in sorted(allowed_set):
        path.append(a)
        yield from rec()
        path.pop()


def periodic_points_upto(G: ShiftGraph, P: int) -> list[EPSequence]:
    """All periodic points with least period at most ``P`` (each once)."""
    pts = []
    for n in range(1, P + 1):
        pts.extend(enumerate_periodic(G, n, minimal=True))
    return pts


def orbit_representatives(G: ShiftGraph, P: int) -> list[tuple[int, ...]]:
    """One primitive cycle word per periodic orbit of least period <= P
    (the lexicographically least rotation)."""
    reps = []
    for n in range(1, P + 1):
        for w in iter_cycle_words(G, n, minimal=True):
            if w == min(w[k:] + w[:k] for k in range(n)):
                reps.append(w)
    return reps


def heteroclinic_points(G: ShiftGraph, P: int, core_bound: int,
                        all_shifts: bool = False) -> list[EPSequence]:
    """Non-periodic EPSequences whose tails come from orbits of period <= P,
    joined by connecting cores of length <= core_bound.

    One point per (left rotation, right orbit, core); with ``all_shifts``
    every shift placing the origin next to or inside the core is added.
    Order is deterministic and duplicates are removed.
    """
    reps = orbit_representatives(G, P)
    seen = set()
    out = []
    for u0 in reps:
        for v in reps:
            for r in range(len(u0)):
                u = u0[r:] + u0[:r]
                for core in _paths_between(G, u[-1], v[0], core_bound):
                    x = EPSequence(u, core, v, 0)
                    if x.is_periodic:
                        continue
                    shifts = range(x.start - 1, x.end + 1) if all_shifts else (0,)
                    for k in shifts:
                        y = ep_shift(x, k)
                        if y not in seen:
                            seen.add(y)
                            out.append(y)
    return out


def _paths_between(G: ShiftGraph, a: int, b: int, max_len: int) -> Iterator[tuple[int, ...]]:
    """Words ``c`` with ``len(c) <= max_len`` such that ``a c b`` is admissible."""
    if G.has_arrow(a, b):
        yield ()
    path: list[int] = []

    def rec(last):
        if len(path) == max_len:
            return
        for s in G.succ[last]:
            path.append(s)
            if G.has_arrow(s, b):
                yield tuple(path)
            yield from rec(s)
            path.pop()

    yield from rec(a)


def path_through(G: ShiftGraph, vertex: int, alive: frozenset[int] | None = None) -> EPSequence:
    """An EPSequence of ``G`` with ``x[0] == vertex``, walking to cycles on
    both sides through ``alive`` (the essential symbols by default)."""
    alive = essential_symbols(G) if alive is None else alive
    if vertex not in alive:
        raise InputError("vertex is not on a bi-infinite path")
    back = [vertex]
    pos = {vertex: 0}
    while True:
        a = next(b for b in G.pred[back[-1]] if b in alive)
        if a in pos:
            k = pos[a]
            break
        pos[a] = len(back)
        back.append(a)
    m = len(back) - 1
    # position -i holds back[i]; position -(m+1) holds back[k] and the past repeats
    left = tuple(reversed(back[k:]))
    fwd = [vertex]
    fpos = {vertex: 0}
    while True:
        b = next(c for c in G.succ[fwd[-1]] if c in alive)
        if b in fpos:
            j = fpos[b]
            break
        fpos[b] = len(fwd)
        fwd.append(b)
    right = tuple(fwd[j:])
    # right region starts at position j; core spans -m .. j-1
    core = tuple(reversed(back[1:])) + tuple(fwd[:j])
    return EPSequence(left, core, right, -m)


def ep_zip(fn, *xs: EPSequence) -> EPSequence:
    """Pointwise combination ``n -> fn(x1[n], x2[n], ...)``."""
    if not xs:
        raise InputError("ep_zip needs at least one sequence")
    lp = 1
    rp = 1
    for x in xs:
        lp = math.lcm(lp, len(x.left))
        rp = math.lcm(rp, len(x.right))
    lo = min(x.start for x in xs)
    hi = max(x.end for x in xs)

    def at(n):
        return fn(*(ep_get(x, n) for x in xs))

    left = tuple(at(n) for n in range(lo - lp, lo))
    core = tuple(at(n) for n in range(lo, hi))
    right = tuple(at(n) for n in range(hi, hi + rp))
    return EPSequence(left, core, right, lo)


def ep_mirror(x: EPSequence) -> EPSequence:
    """The sequence ``n -> x[-n]``."""
    return EPSequence(tuple(reversed(x.right)), tuple(reversed(x.core)),
                      tuple(reversed(x.left)), 1 - x.end)


def reverse_graph(G: ShiftGraph) -> ShiftGraph:
    return ShiftGraph(G.labels, frozenset((b, a) for a, b in G.arrows))


def ep_from_chase(pos0: int, val0, nxt, prv, S: int, E: int, p: int, q: int) -> EPSequence:
    """Assemble a sequence determined step by step from ``x[pos0] = val0``.

    ``nxt(n, x[n])`` gives ``x[n+1]`` and ``prv(n, x[n])`` gives ``x[n-1]``.
    The rules must only depend on ``(n - E) mod q`` for ``n >= E`` and on
    ``(n - S) mod p`` for ``n < S``, which makes the result eventually
    periodic; the chase stops at the first repeated state on each side.
    """
    vals = {pos0: val0}
    pos, val, seen = pos0, val0, {}
    while True:
        if pos >= E:
            key = ((pos - E) % q, val)
            if key in seen:
                r_old, r_new = seen[key], pos
                break
            seen[key] = pos
        val = nxt(pos, val)
        pos += 1
        vals[pos] = val
    pos, val, seen = pos0, val0, {}
    while True:
        if pos < S:
            key = ((pos - S) % p, val)
            if key in seen:
                l_old, l_new = seen[key], pos
                break
            seen[key] = pos
        val = prv(pos, val)
        pos -= 1
        vals[pos] = val
    left = tuple(vals[k] for k in range(l_new + 1, l_old + 1))
    core = tuple(vals[k] for k in range(l_old + 1, r_old))
    right = tuple(vals[k] for k in range(r_old, r_new))
    return EPSequence(left, core, right, l_old + 1)
