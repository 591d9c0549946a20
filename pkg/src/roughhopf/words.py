"""Words over ``{1, ..., n}``: shuffle and tensor Hopf algebras, ordered shuffles.

Words are plain tuples of positive ints; the empty tuple is the unit.
"""
from __future__ import annotations

import itertools
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

from .algebra import Basis, FormalSum, tensor_basis
from .hopf import HopfAlgebra

__all__ = [
    "Word",
    "WORDS",
    "WORD_PAIRS",
    "parse_word",
    "format_word",
    "concat",
    "shuffle",
    "deconcat",
    "deshuffle",
    "ordered_shuffle",
    "ordered_deshuffles",
    "ordered_deshuffle_positions",
    "antipode_word",
    "in_shuffle_set",
    "all_words",
    "SHUFFLE",
    "TENSOR",
]

Word = tuple

_BRACKETED = re.compile(r"\[(\d+)\]")


def format_word(w: Word) -> str:
    if not w:
        return "()"
    if all(0 < a < 10 for a in w):
        return "".join(str(a) for a in w)
    return "".join(f"[{a}]" for a in w)


def parse_word(text: str) -> Word:
    """``"12"`` or ``"[1][2]"`` -> ``(1, 2)``; ``"()"`` or ``""`` -> empty word."""
    text = text.strip()
    if text in ("", "()", "1_"):
        return ()
    if text.startswith("["):
        letters = _BRACKETED.findall(text)
        if "".join(f"[{a}]" for a in letters) != text.replace(" ", ""):
            raise ValueError(f"malformed word literal {text!r}")
        return tuple(int(a) for a in letters)
    if not text.isdigit():
        raise ValueError(f"malformed word literal {text!r}")
    w = tuple(int(a) for a in text)
    if 0 in w:
        raise ValueError("letters start at 1")
    return w


class WordBasis(Basis):
    name = "word"
    unit_key = ()

    def grade(self, key) -> int:
        return len(key)

    def format_key(self, key) -> str:
        return format_word(key)

    def parse_key(self, text: str):
        return parse_word(text)

    def sort_key(self, key):
        return (len(key), key)


WORDS = WordBasis()
WORD_PAIRS = tensor_basis(WORDS, WORDS)


def concat(u: Word, v: Word) -> Word:
    return tuple(u) + tuple(v)


@lru_cache(maxsize=None)
def _shuffle_counts(u: Word, v: Word) -> dict:
    if not u:
        return {v: 1}
    if not v:
        return {u: 1}
    out: dict = {}
    for w, c in _shuffle_counts(u, v[:-1]).items():
        key = w + v[-1:]
        out[key] = out.get(key, 0) + c
    for w, c in _shuffle_counts(u[:-1], v).items():
        key = w + u[-1:]
        out[key] = out.get(key, 0) + c
    return out


def shuffle(u: Word, v: Word) -> FormalSum:
    """All interleavings of ``u`` and ``v`` counted with multiplicity."""
    return FormalSum(WORDS, _shuffle_counts(tuple(u), tuple(v)))


def deconcat(w: Word) -> FormalSum:
    w = tuple(w)
    return FormalSum(WORD_PAIRS, {(w[:i], w[i:]): 1 for i in range(len(w) + 1)})


def deshuffle(w: Word) -> FormalSum:
    """Sum over position subsets ``S`` of ``w|_S ⊗ w|_{S^c}``."""
    w = tuple(w)
    n = len(w)
    acc: dict = {}
    for mask in range(1 << n):
        left = tuple(w[i] for i in range(n) if mask >> i & 1)
        right = tuple(w[i] for i in range(n) if not mask >> i & 1)
        acc[(left, right)] = acc.get((left, right), 0) + 1
    return FormalSum(WORD_PAIRS, acc)


def ordered_shuffle(u: Word, w: Word) -> FormalSum:
    """``(u ⧢ w') w_last`` where ``w = w' w_last``."""
    w = tuple(w)
    if not w:
        raise ValueError("ordered shuffle needs a nonempty right word")
    head, last = w[:-1], w[-1:]
    return FormalSum(WORDS, {x + last: c for x, c in _shuffle_counts(tuple(u), head).items()})


@lru_cache(maxsize=None)
def ordered_deshuffle_positions(length: int, n: int) -> tuple:
    """Set partitions of ``range(length)`` into ``n`` blocks, blocks ordered by their last element.

    Each block is an increasing tuple of positions.  This is the coloured
    version of the ordered deshuffle: repeated letters stay distinguishable.
    """
    if not 1 <= n <= length:
        raise ValueError(f"need 1 <= n <= {length}, got {n}")
    out = []
    for blocks in _set_partitions(list(range(length))):
        if len(blocks) == n:
            out.append(tuple(sorted((tuple(b) for b in blocks), key=lambda b: b[-1])))
    return tuple(sorted(out))


def _set_partitions(items: list) -> Iterator[list]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def ordered_deshuffles(w: Word, n: int) -> list[tuple]:
    """Splittings of ``w`` into ``n`` nonempty subwords whose last letters follow ``w``.

    Returned as a list (with multiplicity, one entry per coloured splitting)
    of tuples of words.
    """
    w = tuple(w)
    if not 1 <= n <= len(w):
        raise ValueError(f"need 1 <= n <= |w| = {len(w)}, got {n}")
    return [tuple(tuple(w[i] for i in block) for block in split)
            for split in ordered_deshuffle_positions(len(w), n)]


def in_shuffle_set(w: Word, parts) -> bool:
    """Whether ``w`` is an interleaving of ``parts`` preserving each part's order."""
    w = tuple(w)
    parts = [tuple(p) for p in parts]
    if sum(len(p) for p in parts) != len(w):
        return False

    @lru_cache(maxsize=None)
    def go(idx: tuple) -> bool:
        pos = sum(idx)
        if pos == len(w):
            return True
        for j, p in enumerate(parts):
            if idx[j] < len(p) and p[idx[j]] == w[pos]:
                nxt = idx[:j] + (idx[j] + 1,) + idx[j + 1:]
                if go(nxt):
                    return True
        return False

    return go(tuple(0 for _ in parts))


def antipode_word(w: Word) -> FormalSum:
    """Antipode of the tensor (concatenation) algebra: ``(-1)^|w| reverse(w)``."""
    w = tuple(w)
    return FormalSum(WORDS, {w[::-1]: (-1) ** len(w)})


def all_words(n: int, max_len: int, min_len: int = 0) -> list[Word]:
    out = []
    for k in range(min_len, max_len + 1):
        out.extend(itertools.product(range(1, n + 1), repeat=k))
    return [tuple(w) for w in out]


def _concat_key(u, v) -> FormalSum:
    return FormalSum(WORDS, {u + v: Fraction(1)})


# (T(V), ⧢, Δ): the shuffle algebra with deconcatenation
SHUFFLE = HopfAlgebra("shuffle", WORDS, shuffle, deconcat, key_antipode=antipode_word)
# (T(V), ·, Δ_⧢): its graded dual, the tensor algebra with deshuffle
TENSOR = HopfAlgebra("tensor", WORDS, _concat_key, deshuffle, key_antipode=antipode_word)
