from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from roughhopf import FormalSum, TruncationError, grade_project, pairing, truncate
from roughhopf.algebra import tensor
from roughhopf.words import WORDS, WORD_PAIRS

words = st.lists(st.integers(1, 3), max_size=3).map(tuple)
coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=7)
sums = st.dictionaries(words, coeffs, max_size=5).map(lambda d: FormalSum(WORDS, d))


def w(text):
    return FormalSum.parse(WORDS, text)


def test_zero_is_additive_identity():
    x = w("1/2 * 12 + 3 * 1")
    assert x + FormalSum.zero(WORDS) == x


def test_exact_fraction_sum():
    x = w("1/2 * 1") + w("1/3 * 1")
    assert x.coeff((1,)) == Fraction(5, 6)


def test_cancellation_removes_key():
    x = w("2 * 12") - w("2 * 12")
    assert len(x) == 0 and x == FormalSum.zero(WORDS)


def test_parse_and_text_roundtrip():
    x = w("3 * 1 + -1/2 * 12 + 1 * ()")
    assert FormalSum.parse(WORDS, x.to_text()) == x
    assert x.coeff(()) == 1


@given(sums, st.integers(0, 3))
def test_truncate_idempotent(x, n):
    once = truncate(x, n)
    assert truncate(once, n) == once
    assert all(len(k) <= n for k, _ in once.items())


@given(sums)
def test_grade_projections_sum_to_whole(x):
    total = FormalSum.zero(WORDS)
    for k in range(4):
        total = total + grade_project(x, k)
    assert total == x


@given(sums, sums, sums, coeffs)
def test_pairing_bilinear(x, y, z, c):
    assert pairing(x + y.scale(c), z) == pairing(x, z) + c * pairing(y, z)
    assert pairing(x, z) == pairing(z, x)


def test_pairing_on_words_is_orthonormal():
    assert pairing(w("1 * 12"), w("1 * 12")) == 1
    assert pairing(w("1 * 12"), w("1 * 21")) == 0


def test_truncation_error_on_level_mismatch():
    x = FormalSum.parse(WORDS, "1 * 12", 2)
    y = FormalSum.parse(WORDS, "1 * 1", 3)
    with pytest.raises(TruncationError):
        x + y
    assert x.with_level(1) == FormalSum.zero(WORDS, 1)


def test_tensor_product_keys():
    t = tensor(w("1 * 1"), w("2 * 2 + 1 * ()"))
    assert t.basis is WORD_PAIRS
    assert t.coeff(((1,), (2,))) == 2 and t.coeff(((1,), ())) == 1


def test_float_mode_and_exactness():
    x = w("1/2 * 1")
    assert x.is_exact()
    y = x.to_float()
    assert not y.is_exact() and y.coeff((1,)) == 0.5


def test_bad_literal_raises():
    with pytest.raises(ValueError):
        w("1 * 1x")
