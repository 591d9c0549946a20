import itertools

import pytest
from hypothesis import given, settings, strategies as st

from roughhopf.algebra import FormalSum
from roughhopf.forests import (CK, GL, MKW, MKW_DUAL, NONPLANAR, PLANAR, antipode_forest, b_minus, b_plus,
                               canonicalize, ck_coproduct, format_forest, gl_dual_coproduct, gl_star, graft,
                               left_graft, mkw_coproduct, mkw_star, nonplanar_forests, nonplanar_trees,
                               num_vertices, parse_forest, planar_forests, planar_trees, sg)


def F(text):
    return parse_forest(text)


def automorphisms(forest):
    """Brute force: vertex permutations preserving decorations and parents."""
    labels, parents = [], []

    def walk(t, parent):
        idx = len(labels)
        labels.append(t[0])
        parents.append(parent)
        for c in t[1]:
            walk(c, idx)

    for t in forest:
        walk(t, None)
    n = len(labels)
    count = 0
    for perm in itertools.permutations(range(n)):
        if all(labels[perm[i]] == labels[i] for i in range(n)) and all(
                (parents[i] is None and parents[perm[i]] is None)
                or (parents[i] is not None and parents[perm[i]] == perm[parents[i]]) for i in range(n)):
            count += 1
    return count


@pytest.mark.parametrize("k", [0, 1, 2, 3, 4])
def test_symmetry_factor_matches_automorphism_count(k):
    for f in nonplanar_forests(k, 2):
        assert sg(f) == automorphisms(f), format_forest(f)


def test_symmetry_factor_examples():
    assert sg(F("[1].[1]")) == 2
    assert sg(F("[1].[2]")) == 1
    assert sg(F("[1:[2],[2]]")) == 2
    assert sg(F("[1:[2],[3]]")) == 1


def test_tree_counts():
    # rooted trees with 1..4 vertices, one decoration: 1, 1, 2, 4
    assert [len(nonplanar_trees(k, 1)) for k in range(1, 5)] == [1, 1, 2, 4]
    # planar: Catalan numbers 1, 1, 2, 5
    assert [len(planar_trees(k, 1)) for k in range(1, 5)] == [1, 1, 2, 5]
    assert len(nonplanar_trees(2, 2)) == 4


def test_literals_and_canonical_form():
    f = F("[2].[1:[3],[2]]")
    assert format_forest(f) == "[2].[1:[3],[2]]"
    assert canonicalize(f) == canonicalize(F("[1:[2],[3]].[2]"))
    assert format_forest(()) == "()"
    for bad in ["[1", "[1:]", "[x]", "1"]:
        with pytest.raises(ValueError):
            F(bad)


def test_b_plus_b_minus():
    f = F("[1].[2]")
    t = b_plus(f, 3)
    assert t == (3, f) and b_minus(t) == f
    assert num_vertices(t) == 3


def test_graft_example():
    got = graft(F("[1]"), F("[3:[4]]")[0])
    assert got == FormalSum(NONPLANAR, {F("[3:[1],[4]]"): 1, F("[3:[4:[1]]]"): 1})


def test_left_graft_inserts_leftmost():
    got = left_graft(F("[1].[2]"), F("[3:[4]]")[0])
    want = ["[3:[1],[2],[4]]", "[3:[1],[4:[2]]]", "[3:[2],[4:[1]]]", "[3:[4:[1],[2]]]"]
    assert got == FormalSum(PLANAR, {F(s): 1 for s in want})


def test_gl_nine_terms():
    got = gl_star(F("[1].[2]"), F("[3:[4]]"))
    assert len(got) == 9 and all(c == 1 for _, c in got.items())
    assert got.coeff(F("[1].[2].[3:[4]]")) == 1


def test_gl_unit_and_repeated_leaf():
    assert gl_star((), F("[1]")) == FormalSum.of(NONPLANAR, F("[1]"))
    got = gl_star(F("[1]"), F("[1]"))
    assert got == FormalSum(NONPLANAR, {F("[1].[1]"): 1, F("[1:[1]]"): 1})


def _forests_upto(k, n=2):
    return [f for j in range(k + 1) for f in nonplanar_forests(j, n)]


def test_gl_dual_to_ck():
    """Coefficient of h in f⋆g times sg(h) equals the CK cut count times sg(f)sg(g)."""
    small = _forests_upto(2)
    targets = _forests_upto(4)
    for f in small:
        for g in small:
            prod = gl_star(f, g)
            for h in targets:
                if len(f) + len(g) == 0:
                    continue
                lhs = prod.coeff(h) * sg(h)
                rhs = ck_coproduct(h).coeff((f, g)) * sg(f) * sg(g)
                assert lhs == rhs, (format_forest(f), format_forest(g), format_forest(h))


def test_gl_dual_coproduct_weights():
    d = gl_dual_coproduct(F("[1].[1]"))
    assert d.coeff((F("[1]"), F("[1]"))) == 2
    assert d.coeff(((), F("[1].[1]"))) == 1


def test_ck_coproduct_example():
    got = ck_coproduct(F("[1:[2]]"))
    assert got.coeff(((), F("[1:[2]]"))) == 1
    assert got.coeff((F("[2]"), F("[1]"))) == 1
    assert got.coeff((F("[1:[2]]"), ())) == 1
    assert len(got) == 3


def test_ck_cherry_coproduct():
    got = ck_coproduct(F("[1:[2],[2]]"))
    assert got.coeff((F("[2]"), F("[1:[2]]"))) == 2
    assert got.coeff((F("[2].[2]"), F("[1]"))) == 1


def test_mkw_product_examples():
    assert mkw_star(F("[1]"), F("[2]")) == FormalSum(PLANAR, {F("[1].[2]"): 1, F("[2:[1]]"): 1})
    assert mkw_star((), F("[2]")) == FormalSum.of(PLANAR, F("[2]"))


def test_mkw_associative_on_small_forests():
    small = [f for k in range(3) for f in planar_forests(k, 2)]
    for a in small[:6]:
        for b in small[:6]:
            for c in small[:6]:
                assert not MKW.associativity_defect(a, b, c)


def test_mkw_coproduct_is_deshuffle_of_trees():
    got = mkw_coproduct(F("[1].[2]"))
    assert got.coeff((F("[1]"), F("[2]"))) == 1 and got.coeff((F("[2]"), F("[1]"))) == 1
    assert len(got) == 4


def test_mkw_dual_coproduct_transposes_product():
    small = [f for k in range(3) for f in planar_forests(k, 2)]
    for f in small:
        for g in small:
            for h, c in mkw_star(f, g).items():
                assert MKW_DUAL.key_coproduct(h).coeff((f, g)) == c


def test_antipode_examples():
    assert antipode_forest(F("[1]"), "CK") == FormalSum.parse(NONPLANAR, "-1 * [1]")
    assert antipode_forest(F("[1:[2]]"), "CK") == FormalSum.parse(NONPLANAR, "1 * [1].[2] + -1 * [1:[2]]")
    for name, alg in [("CK", CK), ("GL", GL), ("MKW", MKW), ("MKW*", MKW_DUAL)]:
        gen = nonplanar_forests if alg.basis is NONPLANAR else planar_forests
        for f in gen(3, 2):
            assert not any(bool(x) for x in alg.antipode_defect(f)), name


planar = st.integers(0, 3).flatmap(lambda k: st.sampled_from(planar_forests(k, 2)))


@settings(max_examples=60)
@given(planar, planar)
def test_mkw_star_grade_and_counit(f, g):
    prod = mkw_star(f, g)
    for h, _ in prod.items():
        assert sum(num_vertices(t) for t in h) == sum(num_vertices(t) for t in f + g)
    assert prod.coeff(f + g) >= 1
