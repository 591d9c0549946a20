import itertools
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from roughhopf.algebra import FormalSum, pairing
from roughhopf.words import (SHUFFLE, TENSOR, WORDS, all_words, antipode_word, concat, deconcat, deshuffle,
                             format_word, in_shuffle_set, ordered_deshuffle_positions, ordered_deshuffles,
                             ordered_shuffle, parse_word, shuffle)

words = st.lists(st.integers(1, 3), max_size=4).map(tuple)


def interleavings(u, v):
    """Brute force: choose which positions of the result come from ``u``."""
    out = Counter()
    n = len(u) + len(v)
    for pos in itertools.combinations(range(n), len(u)):
        iu, iv = iter(u), iter(v)
        out[tuple(next(iu) if i in pos else next(iv) for i in range(n))] += 1
    return out


@given(words, words)
def test_shuffle_matches_interleavings(u, v):
    assert shuffle(u, v) == FormalSum(WORDS, interleavings(u, v))


def test_shuffle_of_repeated_letter():
    assert shuffle((1,), (1,)) == FormalSum.parse(WORDS, "2 * 11")


@given(words, words)
def test_shuffle_commutative(u, v):
    assert shuffle(u, v) == shuffle(v, u)


@settings(max_examples=40)
@given(words, words, words)
def test_shuffle_associative(u, v, w):
    left = SHUFFLE.mul(shuffle(u, v), FormalSum.of(WORDS, w))
    right = SHUFFLE.mul(FormalSum.of(WORDS, u), shuffle(v, w))
    assert left == right


def test_deconcat_and_deshuffle_examples():
    assert deconcat((1, 2)).to_text() == "1 * () ⊗ 12 + 1 * 1 ⊗ 2 + 1 * 12 ⊗ ()"
    d = deshuffle((1, 2))
    assert d.coeff(((1,), (2,))) == 1 and d.coeff(((2,), (1,))) == 1 and len(d) == 4


def test_ordered_shuffle_examples():
    assert ordered_shuffle((1,), (2, 3)) == FormalSum.parse(WORDS, "1 * 123 + 1 * 213")
    assert ordered_shuffle((1, 2), (3,)) == FormalSum.parse(WORDS, "1 * 123")
    with pytest.raises(ValueError):
        ordered_shuffle((1,), ())


@pytest.mark.parametrize("u,v", [((1,), (2,)), ((1, 2), (3,)), ((1,), (2, 3)), ((1, 3), (2, 4))])
def test_shuffle_splits_by_last_letter(u, v):
    assert shuffle(u, v) == ordered_shuffle(u, v) + ordered_shuffle(v, u)


def test_ordered_deshuffle_of_123():
    got = ordered_deshuffles((1, 2, 3), 2)
    assert sorted(got) == sorted([((1,), (2, 3)), ((2,), (1, 3)), ((1, 2), (3,))])


@pytest.mark.parametrize("w", [(1, 2, 3, 4), (1, 1, 2), (2, 1, 2, 1)])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_ordered_deshuffle_membership(w, k):
    for parts in ordered_deshuffles(w, k):
        assert len(parts) == k and all(parts)
        assert in_shuffle_set(w, parts)
    for blocks in ordered_deshuffle_positions(len(w), k):
        lasts = [b[-1] for b in blocks]
        assert lasts == sorted(lasts) and lasts[-1] == len(w) - 1


def test_ordered_deshuffle_count_is_stirling():
    # S(4, 2) = 7 set partitions of four positions into two blocks
    assert len(ordered_deshuffles((1, 2, 3, 4), 2)) == 7
    with pytest.raises(ValueError):
        ordered_deshuffles((1, 2), 3)


def test_antipode_closed_form_and_recursion():
    for w in all_words(2, 4):
        closed = antipode_word(w)
        assert closed == TENSOR.recursive_antipode(w)
        assert closed == FormalSum(WORDS, {w[::-1]: (-1) ** len(w)})


@settings(max_examples=30)
@given(words, words, words)
def test_shuffle_deconcat_duality(u, v, w):
    # <u ⧢ v, w> = <u ⊗ v, Δ w> for deshuffle vs concatenation
    lhs = pairing(shuffle(u, v), FormalSum.of(WORDS, w))
    rhs = deshuffle(w).coeff((u, v))
    assert lhs == rhs


def test_word_literals():
    assert parse_word("123") == (1, 2, 3)
    assert format_word((1, 2)) == "12"
    assert concat((1,), (2, 3)) == (1, 2, 3)
    assert format_word((10, 2)) == format_word(parse_word(format_word((10, 2))))
