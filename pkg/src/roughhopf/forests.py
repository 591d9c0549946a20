"""Decorated rooted trees and forests, planar and non-planar.

A tree is ``(decoration, children)`` with ``children`` a tuple of trees; a
forest is a tuple of trees and the empty forest is the unit.  Non-planar
values are kept in canonical form: children and forest factors sorted by the
natural tuple order, so equality of unordered objects is plain ``==``.

Literal syntax: ``[1:[2],[3]]`` is the cherry rooted at 1, ``[1].[2]`` is the
two-tree forest, ``()`` the empty forest.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

from .algebra import Basis, FormalSum, tensor_basis
from .hopf import HopfAlgebra
from .words import _shuffle_counts

__all__ = [
    "Tree",
    "Forest",
    "PLANAR",
    "NONPLANAR",
    "leaf",
    "canonical_tree",
    "canonicalize",
    "b_plus",
    "b_minus",
    "num_vertices",
    "sg",
    "graft",
    "left_graft",
    "gl_star",
    "mkw_star",
    "ck_coproduct",
    "gl_dual_coproduct",
    "mkw_coproduct",
    "admissible_cuts",
    "antipode_forest",
    "format_forest",
    "parse_forest",
    "planar_trees",
    "nonplanar_trees",
    "planar_forests",
    "nonplanar_forests",
    "planar_orderings",
    "CK",
    "GL",
    "MKW",
    "MKW_DUAL",
]

Tree = tuple
Forest = tuple


def leaf(a: int) -> Tree:
    return (a, ())


# ---------------------------------------------------------------------------
# text form


def format_tree(t: Tree) -> str:
    d, ch = t
    if not ch:
        return f"[{d}]"
    return f"[{d}:" + ",".join(format_tree(c) for c in ch) + "]"


def format_forest(f: Forest) -> str:
    if not f:
        return "()"
    return ".".join(format_tree(t) for t in f)


def parse_forest(text: str) -> Forest:
    """Parse ``[1:[2],[3]].[4]``; whitespace is ignored."""
    s = text.replace(" ", "")
    if s in ("", "()"):
        return ()
    pos = 0

    def tree() -> Tree:
        nonlocal pos
        if s[pos] != "[":
            raise ValueError(f"expected '[' at {pos} in {text!r}")
        pos += 1
        start = pos
        while pos < len(s) and s[pos].isdigit():
            pos += 1
        if start == pos:
            raise ValueError(f"missing decoration at {start} in {text!r}")
        dec = int(s[start:pos])
        children = []
        if s[pos] == ":":
            pos += 1
            children.append(tree())
            while s[pos] == ",":
                pos += 1
                children.append(tree())
        if s[pos] != "]":
            raise ValueError(f"expected ']' at {pos} in {text!r}")
        pos += 1
        return (dec, tuple(children))

    try:
        trees = [tree()]
        while pos < len(s):
            if s[pos] != ".":
                raise ValueError(f"expected '.' at {pos} in {text!r}")
            pos += 1
            trees.append(tree())
    except IndexError:
        raise ValueError(f"unexpected end of input in {text!r}") from None
    return tuple(trees)


# ---------------------------------------------------------------------------
# shape helpers


@lru_cache(maxsize=None)
def canonical_tree(t: Tree) -> Tree:
    d, ch = t
    return (d, tuple(sorted(canonical_tree(c) for c in ch)))


def canonicalize(f: Forest) -> Forest:
    """Canonical representative of a forest read as unordered."""
    return tuple(sorted(canonical_tree(t) for t in f))


@lru_cache(maxsize=None)
def num_vertices(t: Tree) -> int:
    return 1 + sum(num_vertices(c) for c in t[1])


def forest_grade(f: Forest) -> int:
    return sum(num_vertices(t) for t in f)


def b_plus(f: Forest, a: int) -> Tree:
    return (a, tuple(f))


def b_minus(t: Tree) -> Forest:
    return t[1]


@lru_cache(maxsize=None)
def sg(f: Forest) -> int:
    """Symmetry factor of a non-planar forest.

    ``sg(1) = 1``, ``sg([f]_a) = sg(f)`` and a forest with tree multiplicities
    ``m_i`` has ``sg = prod m_i! sg(τ_i)^{m_i}``.
    """
    f = canonicalize(f)
    out = 1
    for t, m in Counter(f).items():
        out *= math.factorial(m) * sg(t[1]) ** m
    return out


class ForestBasis(Basis):
    unit_key = ()

    def __init__(self, name: str, planar: bool):
        self.name = name
        self.planar = planar

    def grade(self, key) -> int:
        return forest_grade(key)

    def weight(self, key) -> int:
        return 1 if self.planar else sg(key)

    def format_key(self, key) -> str:
        return format_forest(key)

    def parse_key(self, text: str):
        f = parse_forest(text)
        return f if self.planar else canonicalize(f)

    def sort_key(self, key):
        return (forest_grade(key), key)


PLANAR = ForestBasis("planar", planar=True)
NONPLANAR = ForestBasis("nonplanar", planar=False)
PLANAR_PAIRS = tensor_basis(PLANAR, PLANAR)
NONPLANAR_PAIRS = tensor_basis(NONPLANAR, NONPLANAR)


# ---------------------------------------------------------------------------
# grafting


def _vertices(t: Tree, path=()) -> list[tuple]:
    out = [path]
    for i, c in enumerate(t[1]):
        out.extend(_vertices(c, path + (i,)))
    return out


def _attach(t: Tree, extra: dict, path=()) -> Tree:
    """Insert ``extra[path]`` (a list of trees) as leftmost children of each vertex."""
    d, ch = t
    new_ch = tuple(_attach(c, extra, path + (i,)) for i, c in enumerate(ch))
    if path in extra:
        new_ch = tuple(extra[path]) + new_ch
    return (d, new_ch)


def _graft_terms(f: Forest, s: Tree) -> Iterator[Tree]:
    # one term per function from positions of f to vertices of s
    verts = _vertices(s)
    for choice in itertools.product(verts, repeat=len(f)):
        extra: dict = {}
        for tree_, v in zip(f, choice):
            extra.setdefault(v, []).append(tree_)
        yield _attach(s, extra)


@lru_cache(maxsize=None)
def _graft_counts(f: Forest, s: Tree) -> dict:
    out: dict = {}
    for t in _graft_terms(f, s):
        t = canonical_tree(t)
        out[t] = out.get(t, 0) + 1
    return out


@lru_cache(maxsize=None)
def _left_graft_counts(f: Forest, s: Tree) -> dict:
    out: dict = {}
    for t in _graft_terms(f, s):
        out[t] = out.get(t, 0) + 1
    return out


def graft(f: Forest, s: Tree) -> FormalSum:
    """Non-planar grafting ``f ↷ s`` as a sum of single-tree forests."""
    f, s = canonicalize(f), canonical_tree(s)
    return FormalSum(NONPLANAR, {(t,): c for t, c in _graft_counts(f, s).items()})


def left_graft(f: Forest, s: Tree) -> FormalSum:
    """Planar left grafting ``f ↷_l s``: trees of ``f`` become leftmost children,
    keeping their relative order when they share a vertex."""
    return FormalSum(PLANAR, {(t,): c for t, c in _left_graft_counts(tuple(f), s).items()})


_AUX = 0  # decoration of the temporary root; never a real letter


@lru_cache(maxsize=None)
def _gl_star_key(f: Forest, g: Forest) -> FormalSum:
    counts = _graft_counts(canonicalize(f), (_AUX, canonicalize(g)))
    return FormalSum(NONPLANAR, {b_minus(t): c for t, c in counts.items()})


@lru_cache(maxsize=None)
def _mkw_star_key(f: Forest, g: Forest) -> FormalSum:
    counts = _left_graft_counts(tuple(f), (_AUX, tuple(g)))
    return FormalSum(PLANAR, {b_minus(t): c for t, c in counts.items()})


def gl_star(x, y) -> FormalSum:
    """Grossman–Larson product ``B⁻(f ↷ B⁺(g))`` on forests or sums of forests."""
    return GL.mul(_as_sum(x, NONPLANAR), _as_sum(y, NONPLANAR))


def mkw_star(x, y) -> FormalSum:
    """Munthe-Kaas–Wright product ``B⁻(f ↷_l B⁺(g))``."""
    return MKW.mul(_as_sum(x, PLANAR), _as_sum(y, PLANAR))


def _as_sum(x, basis) -> FormalSum:
    if isinstance(x, FormalSum):
        return x
    key = tuple(x)
    if basis is NONPLANAR:
        key = canonicalize(key)
    return FormalSum.of(basis, key)


# ---------------------------------------------------------------------------
# coproducts


@lru_cache(maxsize=None)
def admissible_cuts(t: Tree) -> tuple:
    """All admissible cuts of ``t`` as ``(pruned_forest, trunk)`` pairs.

    Includes the empty cut ``((), t)``; the total cut ``(t, 1)`` is not an
    edge cut and is added by the coproduct.
    """
    d, ch = t
    per_child = []
    for c in ch:
        options = [((c,), None)]  # cut the edge above c
        options.extend(admissible_cuts(c))  # keep the edge, cut inside c
        per_child.append(options)
    out = []
    for combo in itertools.product(*per_child):
        pruned = tuple(itertools.chain.from_iterable(p for p, _ in combo))
        trunk = (d, tuple(tr for _, tr in combo if tr is not None))
        out.append((pruned, trunk))
    return tuple(out)


@lru_cache(maxsize=None)
def _ck_tree(t: Tree) -> dict:
    out = {(canonicalize((t,)), ()): 1}
    for pruned, trunk in admissible_cuts(t):
        key = (canonicalize(pruned), canonicalize((trunk,)))
        out[key] = out.get(key, 0) + 1
    return out


@lru_cache(maxsize=None)
def _ck_forest(f: Forest) -> dict:
    acc = {((), ()): 1}
    for t in f:
        nxt: dict = {}
        for (a1, b1), c1 in acc.items():
            for (a2, b2), c2 in _ck_tree(t).items():
                key = (canonicalize(a1 + a2), canonicalize(b1 + b2))
                nxt[key] = nxt.get(key, 0) + c1 * c2
        acc = nxt
    return acc


def ck_coproduct(f: Forest) -> FormalSum:
    """Connes–Kreimer coproduct: admissible cuts, multiplicative over trees."""
    return FormalSum(NONPLANAR_PAIRS, _ck_forest(canonicalize(tuple(f))))


@lru_cache(maxsize=None)
def _gl_delta(f: Forest) -> dict:
    counts = Counter(f)
    trees = sorted(counts)
    out = {}
    sf = sg(f)
    for split in itertools.product(*(range(counts[t] + 1) for t in trees)):
        g = tuple(itertools.chain.from_iterable([t] * k for t, k in zip(trees, split)))
        h = tuple(itertools.chain.from_iterable([t] * (counts[t] - k) for t, k in zip(trees, split)))
        out[(g, h)] = Fraction(sf, sg(g) * sg(h))
    return out


def gl_dual_coproduct(f: Forest) -> FormalSum:
    """``δf = Σ_{gh=f} sg(f)/(sg(g) sg(h)) g⊗h``."""
    return FormalSum(NONPLANAR_PAIRS, _gl_delta(canonicalize(tuple(f))))


@lru_cache(maxsize=None)
def _mkw_delta(f: Forest) -> dict:
    n = len(f)
    acc: dict = {}
    for mask in range(1 << n):
        left = tuple(f[i] for i in range(n) if mask >> i & 1)
        right = tuple(f[i] for i in range(n) if not mask >> i & 1)
        acc[(left, right)] = acc.get((left, right), 0) + 1
    return acc


def mkw_coproduct(f: Forest) -> FormalSum:
    """Deshuffle of the planar forest read as a word of trees."""
    return FormalSum(PLANAR_PAIRS, _mkw_delta(tuple(f)))


# ---------------------------------------------------------------------------
# enumeration


@lru_cache(maxsize=None)
def _ordered_forests_of_size(k: int, n: int) -> tuple:
    if k == 0:
        return ((),)
    out = []
    for first in range(1, k + 1):
        for t in planar_trees(first, n):
            for rest in _ordered_forests_of_size(k - first, n):
                out.append((t,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def planar_trees(k: int, n: int) -> tuple:
    """Planar trees with exactly ``k`` vertices decorated by ``1..n``."""
    if k < 1:
        return ()
    return tuple((d, f) for d in range(1, n + 1) for f in _ordered_forests_of_size(k - 1, n))


def planar_forests(k: int, n: int) -> tuple:
    """Planar forests with exactly ``k`` vertices."""
    return _ordered_forests_of_size(k, n)


@lru_cache(maxsize=None)
def nonplanar_trees(k: int, n: int) -> tuple:
    return tuple(sorted({canonical_tree(t) for t in planar_trees(k, n)}))


@lru_cache(maxsize=None)
def nonplanar_forests(k: int, n: int) -> tuple:
    return tuple(sorted({canonicalize(f) for f in planar_forests(k, n)}))


def planar_orderings(t: Tree) -> list[Tree]:
    """All distinct planar trees whose non-planar shape is ``t``, with multiplicity
    one per permutation of children at every vertex."""
    d, ch = t
    child_opts = [planar_orderings(c) for c in ch]
    out = []
    for perm in itertools.permutations(range(len(ch))):
        for combo in itertools.product(*(child_opts[i] for i in perm)):
            out.append((d, tuple(combo)))
    return out


# ---------------------------------------------------------------------------
# the Hopf structures


def _forest_product_np(f, g) -> FormalSum:
    return FormalSum(NONPLANAR, {canonicalize(f + g): 1})


def _shuffle_forest(f, g) -> FormalSum:
    return FormalSum(PLANAR, _shuffle_counts(tuple(f), tuple(g)))


def _ck_key(f) -> FormalSum:
    return FormalSum(NONPLANAR_PAIRS, _ck_forest(f))


def _gl_key(f) -> FormalSum:
    return FormalSum(NONPLANAR_PAIRS, _gl_delta(f))


def _mkw_key(f) -> FormalSum:
    return FormalSum(PLANAR_PAIRS, _mkw_delta(f))


# Connes–Kreimer: commutative forest product, admissible-cut coproduct
CK = HopfAlgebra("CK", NONPLANAR, _forest_product_np, _ck_key)
# Grossman–Larson: its graded dual under <f, g> = sg(f) δ_{f,g}
GL = HopfAlgebra("GL", NONPLANAR, _gl_star_key, _gl_key)
# graded dual of Munthe-Kaas–Wright: left-grafting product, deshuffle coproduct
MKW = HopfAlgebra("MKW", PLANAR, _mkw_star_key, _mkw_key)


@lru_cache(maxsize=None)
def _mkw_dual_table(k: int, n: int) -> dict:
    """Coproduct of ``H_MKW`` on grade-``k`` forests over ``n`` letters, as the
    transpose of the ⋆ product table."""
    table: dict = {}
    for a in range(k + 1):
        for f in planar_forests(a, n):
            for g in planar_forests(k - a, n):
                for h, c in _mkw_star_key(f, g).items():
                    table.setdefault(h, {})
                    table[h][(f, g)] = table[h].get((f, g), 0) + c
    return table


def _alphabet(f) -> int:
    def mx(t):
        return max([t[0]] + [mx(c) for c in t[1]])
    return max((mx(t) for t in f), default=1)


def _mkw_dual_coproduct(f) -> FormalSum:
    f = tuple(f)
    table = _mkw_dual_table(forest_grade(f), _alphabet(f))
    return FormalSum(PLANAR_PAIRS, table.get(f, {}))


# Munthe-Kaas–Wright: shuffle of forests, coproduct dual to ⋆ (full left cuts)
MKW_DUAL = HopfAlgebra("MKW*", PLANAR, _shuffle_forest, _mkw_dual_coproduct)


_STRUCTURES = {"CK": CK, "GL": GL, "MKW": MKW, "MKW*": MKW_DUAL}


def antipode_forest(f, structure: str = "GL") -> FormalSum:
    """Antipode by grade recursion in the named structure (CK, GL, MKW or MKW*)."""
    alg = _STRUCTURES[structure]
    key = tuple(f)
    if alg.basis is NONPLANAR:
        key = canonicalize(key)
    return alg.key_antipode(key)
