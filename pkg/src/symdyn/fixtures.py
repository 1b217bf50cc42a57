"""Built-in example shifts and factors.

Each function returns a fresh object.  ``FIXTURES`` maps the names used by
project files (``fixture NAME builtin=...``) to the factor builders.
"""
from __future__ import annotations

from fractions import Fraction

from .relation import BowenFactor, SymRelation
from .shiftcore import EPSequence, ShiftGraph


def one_block(source: ShiftGraph, target: ShiftGraph, mapping: dict, relation: SymRelation,
              name: str = "") -> BowenFactor:
    code = tuple(target.symbol(mapping[lab]) for lab in source.labels)
    return BowenFactor(source, relation, target, code, name=name)


def golden_mean(labels=("a", "b")) -> ShiftGraph:
    a, b = labels
    return ShiftGraph.from_labels(labels, [(a, a), (a, b), (b, a)])


def cycle_graph(n: int, prefix: str = "") -> ShiftGraph:
    return ShiftGraph.from_labels([f"{prefix}{i}" for i in range(n)],
                                  [(f"{prefix}{i}", f"{prefix}{(i + 1) % n}") for i in range(n)])


def zero_one_two() -> BowenFactor:
    """Full shift on {0,1,2} with ``a ~ b`` iff ``|a - b|`` is 0 or 2,
    realized by the one-block code merging 0 and 2."""
    X = ShiftGraph.full_shift(3)
    Y = ShiftGraph.full_shift(2, ["e", "o"])
    rel = SymRelation.from_pairs(3, [(0, 2)])
    return one_block(X, Y, {"0": "e", "1": "o", "2": "e"}, rel, "zero_one_two")


def two_copy() -> BowenFactor:
    """Two disjoint copies of the golden mean shift, mapped onto one copy."""
    X = ShiftGraph.from_labels(["a1", "b1", "a2", "b2"],
                               [("a1", "a1"), ("a1", "b1"), ("b1", "a1"),
                                ("a2", "a2"), ("a2", "b2"), ("b2", "a2")])
    Y = golden_mean()
    rel = SymRelation.from_key([lab[0] for lab in X.labels])
    return one_block(X, Y, {"a1": "a", "b1": "b", "a2": "a", "b2": "b"}, rel, "two_copy")


def twisted_two_copy() -> BowenFactor:
    """Irreducible double cover of the golden mean: the loop at ``a`` swaps sheets."""
    X = ShiftGraph.from_labels(["a1", "b1", "a2", "b2"],
                               [("a1", "a2"), ("a2", "a1"), ("a1", "b1"), ("b1", "a1"),
                                ("a2", "b2"), ("b2", "a2")])
    Y = golden_mean()
    rel = SymRelation.from_key([lab[0] for lab in X.labels])
    return one_block(X, Y, {"a1": "a", "b1": "b", "a2": "a", "b2": "b"}, rel, "twisted_two_copy")


def identity(G: ShiftGraph, name: str = "identity") -> BowenFactor:
    return BowenFactor(G, SymRelation.equality(G.size), G, tuple(range(G.size)), name=name)


def identity_full2() -> BowenFactor:
    return identity(ShiftGraph.full_shift(2, ["c", "d"]), "identity_full2")


def identity_golden() -> BowenFactor:
    return identity(golden_mean(), "identity_golden")


def disjoint_union(f: BowenFactor, g: BowenFactor, name: str = "") -> BowenFactor:
    """Union of two factors on disjoint source and target alphabets."""
    n, m = f.source.size, f.target.size
    X = ShiftGraph(f.source.labels + g.source.labels,
                   f.source.arrows | {(a + n, b + n) for a, b in g.source.arrows})
    Y = ShiftGraph(f.target.labels + g.target.labels,
                   f.target.arrows | {(a + m, b + m) for a, b in g.target.arrows})
    code = f.code + tuple(c + m for c in g.code)
    rel = SymRelation(X.size, f.relation.pairs | {(a + n, b + n) for a, b in g.relation.pairs})
    return BowenFactor(X, rel, Y, code, name=name)


def mixed_fiber() -> BowenFactor:
    """Two-copy fixture next to an identity full 2-shift: fibers of size 2 and 1."""
    return disjoint_union(two_copy(), identity_full2(), "mixed_fiber")


def cyclic(p: int = 4) -> BowenFactor:
    """A single self-loop blown up into a p-cycle, every symbol related to every other."""
    X = cycle_graph(p, "a")
    Y = ShiftGraph.from_labels(["a"], [("a", "a")])
    rel = SymRelation.from_pairs(p, [(i, j) for i in range(p) for j in range(p)])
    return one_block(X, Y, {lab: "a" for lab in X.labels}, rel, f"cyclic{p}")


def cyclic_parity() -> BowenFactor:
    """4-cycle coded by phase parity; ``0 ~ 1`` is an extra pair that no two
    related points ever use at the same time."""
    X = cycle_graph(4)
    Y = cycle_graph(2, "p")
    rel = SymRelation.from_pairs(4, [(0, 2), (1, 3), (0, 1)])
    return one_block(X, Y, {"0": "p0", "1": "p1", "2": "p0", "3": "p1"}, rel, "cyclic_parity")


def bad_regular() -> BowenFactor:
    """A graph with the orbit structure listed for the example where the
    minimal class over the regular part is smaller than over the
    word-recurrent part.

    Two 3-cycles project to ``+1``, two to ``-1``; the symbol ``000``
    projects to ``0`` and is entered from phase 2 of the ``+1`` cycles and
    left towards phase 0 of the ``-1`` cycles.  This is a reconstruction,
    checked against the listed properties in the tests.
    """
    labels = []
    arrows = []
    for sign in "+-":
        for k in range(2):
            for j in range(3):
                labels.append(f"{sign}{k}{j}")
                arrows.append((f"{sign}{k}{j}", f"{sign}{k}{(j + 1) % 3}"))
    labels.append("000")
    for k in range(2):
        arrows.append((f"+{k}2", "000"))
        arrows.append(("000", f"-{k}0"))
    X = ShiftGraph.from_labels(labels, arrows)
    Y = ShiftGraph.from_labels(["+", "0", "-"], [("+", "+"), ("+", "0"), ("0", "-"), ("-", "-")])
    rel = SymRelation.from_key([lab[0] for lab in X.labels])
    return one_block(X, Y, {lab: lab[0] for lab in X.labels}, rel, "bad_regular")


def period_two_track(p: int = 4, tracks: int = 2) -> ShiftGraph:
    """``p`` phases with ``tracks`` symbols each; every symbol of phase ``i``
    leads to every symbol of phase ``i+1``."""
    labels = [f"{i}.{t}" for i in range(p) for t in range(tracks)]
    arrows = [(f"{i}.{s}", f"{(i + 1) % p}.{t}") for i in range(p) for s in range(tracks) for t in range(tracks)]
    return ShiftGraph.from_labels(labels, arrows)


# -- the alpha/omega example on a finite window of the integers ------------


def alpha_omega_graph(K: int = 6) -> ShiftGraph:
    ints = [str(n) for n in range(K)]
    arrows = [("A", "A"), ("W", "W")]
    arrows += [(str(n), str(n + 1)) for n in range(K - 1)]
    arrows += [("A", s) for s in ints] + [(s, "W") for s in ints]
    return ShiftGraph.from_labels(["A", "W"] + ints, arrows)


def alpha_omega(K: int = 6, cutoff: int = 4) -> BowenFactor:
    """Finite analog of the alpha/omega example of a map that is Bowen on
    recurrent points but not on heteroclinic ones.

    Symbols ``A`` (alpha), ``W`` (omega) and ``0..K-1``.  A run of length
    ``l < cutoff`` between the two fixed tails maps to ``(1/l)^l`` between
    zero tails; runs of length ``>= cutoff`` stand in for the infinite runs
    outside the regular part and map to the zero sequence.
    """
    G = alpha_omega_graph(K)
    A, W = G.symbol("A"), G.symbol("W")
    ints = set(range(2, G.size))

    def image(x: EPSequence) -> EPSequence:
        zero = EPSequence.periodic((Fraction(0),))
        if x.is_periodic:
            return zero
        run = [n for n in range(x.start - 1, x.end + 1) if x[n] in ints]
        if not run:
            return zero
        ell = len(run)
        if ell >= cutoff:
            return zero
        return EPSequence((Fraction(0),), (Fraction(1, ell),) * ell, (Fraction(0),), run[0])

    pairs = [(a, b) for a in ints for b in ints] + [(A, W)]
    rel = SymRelation.from_pairs(G.size, pairs)
    return BowenFactor(G, rel, image_fn=image, name="alpha_omega")


def alpha_omega_family(K: int = 6, cutoff: int = 4) -> list[EPSequence]:
    """The heteroclinic points with long runs, mapped like the fixed points."""
    G = alpha_omega_graph(K)
    A, W = G.symbol("A"), G.symbol("W")
    out = []
    for n in range(K):
        for ell in range(cutoff, K - n + 1):
            out.append(EPSequence((A,), tuple(G.symbol(str(n + i)) for i in range(ell)), (W,), 0))
    return out


FIXTURES = {
    "zero_one_two": zero_one_two,
    "two_copy": two_copy,
    "twisted_two_copy": twisted_two_copy,
    "mixed_fiber": mixed_fiber,
    "identity_full2": identity_full2,
    "identity_golden": identity_golden,
    "cyclic4": cyclic,
    "cyclic_parity": cyclic_parity,
    "bad_regular": bad_regular,
    "alpha_omega": alpha_omega,
}

# fixtures given by one-block codes (usable everywhere a symbol map is needed)
CODED_FIXTURES = [k for k in FIXTURES if k != "alpha_omega"]
