import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from roughhopf.algebra import FormalSum
from roughhopf.differentials import PseudoBialgebraMap
from roughhopf.grouplike import is_grouplike
from roughhopf.polynomials import Polynomial, PolyVectorField, random_field, random_polynomial
from roughhopf.pushforward import (OneForm, PushforwardError, chain_rule_direct, chain_rule_words,
                                   compose_expansions, factorization_check, field_expansion,
                                   local_pushforward_expansion, manifold_consistency_check, one_form_expansion,
                                   one_form_word_coeff, pushforward, set_A, set_B, zeta, zeta_inverse)
from roughhopf.roughpath import PiecewiseLinearPath, group_path_from_primitives, signature_lift
from roughhopf.solver import apply_signature
from roughhopf.words import WORDS, all_words

P = Polynomial
x, y = P.var(2, 0), P.var(2, 1)


def test_one_form_word_coefficients():
    phi = x * x * y
    nu = OneForm.from_map(phi)
    assert one_form_word_coeff(nu, (1,)) == [x * y * 2]
    assert one_form_word_coeff(nu, (2,)) == [x * x]
    # ν_12 = ∂_1 ν_2
    assert one_form_word_coeff(nu, (1, 2)) == [x * 2]
    assert one_form_word_coeff(nu, (1, 1, 2)) == [P.const(2, 2)]
    assert one_form_word_coeff(nu, (2, 2, 1)) == [P.zero(2)]
    with pytest.raises(ValueError):
        one_form_word_coeff(nu, ())
    with pytest.raises(ValueError):
        one_form_word_coeff(nu, (3,))


def test_identity_expansion_is_diagonal():
    E = local_pushforward_expansion([x, y], 3)
    for w in all_words(2, 3, 1):
        for u in all_words(2, 3, 1):
            assert E.coefficient(w, u) == (P.const(2, 1) if w == u else P.zero(2))


def test_linear_expansion_is_tensor_power():
    A = [[2, -1], [Fraction(1, 2), 3]]
    phi = [x * A[0][0] + y * A[0][1], x * A[1][0] + y * A[1][1]]
    E = local_pushforward_expansion(phi, 2)
    for w in all_words(2, 2, 1):
        for u in all_words(2, 2, 1):
            want = math.prod((A[a - 1][b - 1] for a, b in zip(w, u)), start=Fraction(1)) if len(w) == len(u) else 0
            assert E.coefficient(w, u) == P.const(2, want)


def test_quadratic_terms():
    t = P.var(1, 0)
    E = local_pushforward_expansion(t * t, 2)
    assert E.coefficient((1,), (1,)) == t * 2
    assert E.coefficient((1,), (1, 1)) == P.const(1, 2)
    # one ordered deshuffle of two positions into two blocks
    assert E.coefficient((1, 1), (1, 1)) == t * t * 4


def test_one_form_expansion_matches_exact_form():
    phi = [x * y + y, x * x]
    assert one_form_expansion(OneForm.from_map(phi), 3) == local_pushforward_expansion(phi, 3)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_chain_rule_over_words(seed):
    rng = random.Random(seed)
    phi = [random_polynomial(2, 2, rng) for _ in range(2)]
    psi = random_polynomial(2, 2, rng)
    for w in all_words(2, 3):
        assert chain_rule_words(psi, phi, w) == chain_rule_direct(psi, phi, w)
    assert chain_rule_words([psi, psi], phi, (1, 2)) == chain_rule_direct([psi, psi], phi, (1, 2))


def test_factorization_exact_and_sensitive():
    rng = random.Random(1)
    phi = [random_polynomial(2, 2, rng) for _ in range(2)]
    psi = [random_polynomial(2, 2, rng) for _ in range(2)]
    assert factorization_check(phi, psi, 3) == 0
    direct = local_pushforward_expansion([p.compose(phi) for p in psi], 3)
    wrong = compose_expansions(local_pushforward_expansion(psi, 3), local_pushforward_expansion(phi, 3),
                               [phi[0] + 1, phi[1]])
    assert direct.defect(wrong) > 0


@pytest.mark.parametrize("length", [1, 2, 3, 4])
def test_index_bijection(length):
    for k in range(1, length + 1):
        A, B = set_A(length, k, 2), set_B(length, k, 2)
        assert len(A) == len(B)
        assert all(zeta_inverse(zeta(a)) == a for a in A)
        assert all(zeta(zeta_inverse(b)) == b for b in B)
        assert {zeta(a) for a in A} == set(B)


def test_field_expansion_matches_solver_expansion():
    rng = random.Random(2)
    V = [random_field(2, 1, rng) for _ in range(2)]
    phi = random_polynomial(2, 2, rng)
    E = field_expansion(V, phi, 2)
    fmap = PseudoBialgebraMap("tensor", V)
    X = signature_lift(PiecewiseLinearPath([0, 1], [[0, 0], [Fraction(1, 3), -1]]), 2)
    pt = [Fraction(1, 2), Fraction(-2, 3)]
    val = X(0, 1)
    got = E.contract(pt, val).coeff((1,)) + phi(pt)
    assert got == apply_signature(fmap, val, phi)(pt)
    coords = [PolyVectorField.coordinate(2, i) for i in range(2)]
    assert field_expansion(coords, [x, y * y], 3) == local_pushforward_expansion([x, y * y], 3)


def path2():
    return PiecewiseLinearPath([0, Fraction(1, 2), 1], [[0, 0], [1, Fraction(1, 2)], [Fraction(-1, 2), 1]])


def test_linear_pushforward_is_signature_of_image():
    A = [[2, -1], [1, 3]]
    phi = [x * 2 - y, x + y * 3]
    X = signature_lift(path2(), 3)
    pts = [[sum(A[i][j] * p[j] for j in range(2)) for i in range(2)] for p in path2().points]
    Z = signature_lift(PiecewiseLinearPath(path2().times, pts), 3)
    Y = pushforward(X, phi, 3, [0, 0], refine=4, exact=True)
    assert Y(0, 1) == Z(0, 1)
    assert Y(Fraction(1, 4), Fraction(3, 4)) == Z(Fraction(1, 4), Fraction(3, 4))


def test_identity_pushforward_exact():
    X = signature_lift(path2(), 3)
    assert pushforward(X, [x, y], 3, [0, 0], refine=2, exact=True)(0, 1) == X(0, 1)


def test_trace_is_exact_for_quadratic_maps():
    phi = [x * y + x, y * y]
    X = signature_lift(path2(), 2)
    x0 = [Fraction(1, 3), Fraction(-1, 2)]
    Y = pushforward(X, phi, 2, x0, refine=8, exact=True)
    start = [Fraction(1, 3), Fraction(-1, 2)]
    end = [start[0] + Fraction(-1, 2), start[1] + 1]
    got = Y(0, 1)
    for j in range(2):
        assert got.coeff((j + 1,)) == phi[j](end) - phi[j](start)


def test_refinement_converges_and_shuffle_is_approximate():
    phi = [x * x + y, x * y]
    X = signature_lift(path2(), 2).to_float()
    ref = pushforward(X, phi, 2, [0.0, 0.0], refine=512)(0.0, 1.0)
    errs = [(pushforward(X, phi, 2, [0.0, 0.0], refine=r)(0.0, 1.0) - ref).max_abs() for r in (16, 32, 64)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[0] / errs[1] > 3 and errs[1] / errs[2] > 3
    Y = pushforward(X, phi, 2, [0.0, 0.0], refine=64)
    v = Y(0.0, 1.0)
    shuffle_gap = abs(v.coeff((1,)) * v.coeff((2,)) - v.coeff((1, 2)) - v.coeff((2, 1)))
    assert shuffle_gap <= 10 * Y.refinement_defect(0.0, 1.0)
    assert is_grouplike(v, tol=10 * Y.refinement_defect(0.0, 1.0))


def test_tolerance_enforced():
    X = signature_lift(path2(), 2).to_float()
    with pytest.raises(PushforwardError):
        pushforward(X, [x * x * x, y], 2, [0.0, 0.0], refine=4, tol=1e-9)(0.0, 1.0)


def test_constructor_errors():
    X = signature_lift(path2(), 2)
    with pytest.raises(ValueError):
        pushforward(X, [x, y], 3, [0, 0])
    with pytest.raises(ValueError):
        pushforward(X, [x, y], 2, [0])
    with pytest.raises(ValueError):
        pushforward(X, [x, y], 2, [0, 0], refine=0)
    gl = group_path_from_primitives([(FormalSum.parse(WORDS, "1 * 1", 2), 1)], 2)
    gl.structure = "GL"
    with pytest.raises(ValueError):
        pushforward(gl, [x, y], 2, [0, 0])


def charts(shift_j=0):
    pi = path2()
    Xi = signature_lift(pi, 2).to_float()
    # chart j: (u, v) = (x + y, 2y - 1)
    pts = [[p[0] + p[1] + shift_j, 2 * p[1] - 1] for p in pi.points]
    Xj = signature_lift(PiecewiseLinearPath(pi.times, pts), 2).to_float()
    return {"i": (Xi, [0.0, 0.0]), "j": (Xj, [0.0, -1.0])}


def test_manifold_consistency_linear_transition():
    grid = [0.0, 0.25, 0.5, 0.75, 1.0]
    T = {("i", "j"): [x + y, y * 2 - 1]}
    table = manifold_consistency_check(charts(), T, grid, 2, refine=8)
    assert table.ok and table.max_defect < 1e-12 and len(table.rows) == 10
    assert table.to_csv().startswith("chart_i,chart_j,s,t,defect\n")


def test_manifold_consistency_flags_corruption():
    grid = [0.0, 0.5, 1.0]
    bad = charts()
    Xj, x0 = bad["j"]
    bent = [[0, -1], [Fraction(3, 2), 0], [Fraction(1, 2), 2]]
    bad["j"] = (signature_lift(PiecewiseLinearPath(path2().times, bent), 2).to_float(), x0)
    table = manifold_consistency_check(bad, {("i", "j"): [x + y, y * 2 - 1]}, grid, 2, refine=8)
    assert not table.ok and table.flagged


def test_manifold_consistency_needs_overlap():
    with pytest.raises(ValueError):
        manifold_consistency_check(charts(), {("i", "j"): [x + y, y * 2 - 1]}, [0.5], 2)
    with pytest.raises(KeyError):
        manifold_consistency_check(charts(), {("i", "k"): [x, y]}, [0.0, 1.0], 2)
