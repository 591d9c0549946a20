import pytest
from hypothesis import given, settings, strategies as st

from roughhopf.algebra import FormalSum
from roughhopf.forests import NONPLANAR, PLANAR
from roughhopf.grouplike import GroupLikeError, exp_n, inverse, is_grouplike, is_primitive, log_n, star, structure
from roughhopf.words import TENSOR, WORDS

small = st.fractions(min_value=-3, max_value=3, max_denominator=5)


def W(text, level):
    return FormalSum.parse(WORDS, text, level)


@given(small, small)
def test_exp_level2_closed_form(a, b):
    h = FormalSum(WORDS, {(1,): a, (2,): b}, 2)
    want = FormalSum(WORDS, {(): 1, (1,): a, (2,): b, (1, 1): a * a / 2, (1, 2): a * b / 2,
                             (2, 1): a * b / 2, (2, 2): b * b / 2}, 2)
    assert exp_n(h) == want


def test_exp_of_area_is_one_plus_area():
    area = W("1 * 12 + -1 * 21", 3)
    assert exp_n(area) == W("1 * () + 1 * 12 + -1 * 21", 3)


@settings(max_examples=30)
@given(small, small, small)
def test_exp_is_grouplike_and_inverse(a, b, c):
    h = FormalSum(WORDS, {(1,): a, (2,): b, (1, 2): c, (2, 1): -c}, 3)
    g = exp_n(h)
    assert is_grouplike(g)
    assert inverse(g) == exp_n(h.scale(-1))
    assert star(g, inverse(g)) == TENSOR.unit(3)
    assert log_n(g) == h


@pytest.mark.parametrize("alg,basis,text", [
    ("GL", NONPLANAR, "1 * [1] + 1/2 * [2:[1]] + -1 * [1].[2]"),
    ("MKW", PLANAR, "1 * [1] + 2 * [2:[1]] + -1/3 * [1].[2]"),
])
def test_exp_log_roundtrip_on_forests(alg, basis, text):
    h = FormalSum.parse(basis, text, 3)
    assert log_n(exp_n(h, alg), alg) == h


def test_grade_projection_of_primitive_stays_primitive():
    p = W("1 * 1 + 1 * 12 + -1 * 21 + 1 * 112 + -2 * 121 + 1 * 211", 3)
    assert is_primitive(p)
    for k in (1, 2, 3):
        assert is_primitive(p.grade_project(k))
    assert not is_primitive(W("1 * 12", 3))


@pytest.mark.parametrize("alg,basis,x,y", [
    ("tensor", WORDS, "1 * 1", "1 * 2"),
    ("GL", NONPLANAR, "1 * [1]", "1 * [2:[1]]"),
    ("MKW", PLANAR, "1 * [1]", "1 * [2]"),
])
def test_commutator_of_primitives_is_primitive(alg, basis, x, y):
    a = structure(alg)
    X, Y = FormalSum.parse(basis, x, 3), FormalSum.parse(basis, y, 3)
    assert is_primitive(X, a) and is_primitive(Y, a)
    assert is_primitive(a.commutator(X, Y, 3), a)


def test_errors():
    with pytest.raises(GroupLikeError):
        exp_n(W("1 * () + 1 * 1", 2))
    with pytest.raises(GroupLikeError):
        log_n(W("1 * 1", 2))
    with pytest.raises(GroupLikeError):
        inverse(W("1 * () + 1 * 12", 2))
    with pytest.raises(ValueError):
        structure("CK-dual")
    with pytest.raises(ValueError):
        exp_n(FormalSum.parse(WORDS, "1 * 1"))


def test_float_grouplike_tolerance():
    g = exp_n(W("1/3 * 1 + 1 * 2", 3)).to_float()
    assert is_grouplike(g, tol=1e-12)
    assert not is_grouplike(g + W("1/1000 * 12", 3).to_float(), tol=1e-12)
