import random

import pytest
from hypothesis import given, settings, strategies as st

from roughhopf.algebra import FormalSum
from roughhopf.differentials import (Connection, PseudoBialgebraMap, check_graft_compatibility,
                                     check_pseudo_bialgebra, cov_deriv_field_n, cov_deriv_field_tensor,
                                     cov_deriv_scalar_n, cov_deriv_vector, curvature, level2_comparison,
                                     lie_map_extension, torsion, vector_field_bracket)
from roughhopf.forests import left_graft, parse_forest, nonplanar_forests, planar_forests, planar_trees
from roughhopf.polynomials import DiffOperator, Polynomial, PolyVectorField, random_field, random_polynomial
from roughhopf.words import WORDS, all_words

seeds = st.integers(0, 10_000)


def setup(seed, d=2):
    rng = random.Random(seed)
    return rng, Connection.random(d, 1, rng), [random_field(d, 2, rng) for _ in range(3)]


def test_covariant_derivative_example():
    x = Polynomial.var(1, 0)
    conn = Connection(1, [[[x]]])
    V = PolyVectorField([x])
    got = cov_deriv_vector(conn, PolyVectorField.coordinate(1, 0), V)
    assert got == PolyVectorField([Polynomial.const(1, 1) + x * x])


def test_flat_derivative_is_directional():
    U = PolyVectorField([Polynomial.var(2, 1), Polynomial.zero(2)])
    V = PolyVectorField([Polynomial.zero(2), Polynomial.var(2, 0) ** 2])
    # U = y∂x, V = x²∂y: ∇_U V = y·2x ∂y
    assert cov_deriv_vector(None, U, V) == PolyVectorField([Polynomial.zero(2), Polynomial(2, {(1, 1): 2})])


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_iterated_derivative_matches_tensor_calculus(seed):
    rng, conn, (V, U1, U2) = setup(seed)
    assert cov_deriv_field_n(conn, V, [U1, U2]) == cov_deriv_field_tensor(conn, V, [U1, U2])
    assert cov_deriv_field_n(conn, V, [U1]) == cov_deriv_field_tensor(conn, V, [U1])


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_torsion_and_curvature_antisymmetry(seed):
    rng, conn, (U, V, W) = setup(seed)
    assert torsion(conn, U, V) == -torsion(conn, V, U)
    assert curvature(conn, U, V, W) == -curvature(conn, V, U, W)
    assert torsion(conn.symmetrized(), U, V).is_zero()
    assert torsion(None, U, V).is_zero() and curvature(None, U, V, W).is_zero()


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_torsion_and_curvature_are_tensorial(seed):
    rng, conn, (U, V, W) = setup(seed)
    f = random_polynomial(2, 1, rng)
    assert torsion(conn, U * f, V) == torsion(conn, U, V) * f
    assert curvature(conn, U, V, W * f) == curvature(conn, U, V, W) * f


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_scalar_second_derivative_symmetric_without_torsion(seed):
    rng, conn, (U, V, _) = setup(seed)
    phi = random_polynomial(2, 3, rng)
    sym = conn.symmetrized()
    assert cov_deriv_scalar_n(sym, phi, [U, V]) == cov_deriv_scalar_n(sym, phi, [V, U])


@pytest.mark.parametrize("structure", ["tensor", "GL", "MKW"])
def test_unit_maps_to_identity(structure):
    rng = random.Random(0)
    conn = Connection.random(2, 1, rng) if structure == "MKW" else None
    fmap = PseudoBialgebraMap(structure, [random_field(2, 1, rng)], conn)
    assert fmap(()) == DiffOperator.identity(2)


def test_constructor_errors():
    rng = random.Random(1)
    V = [random_field(2, 1, rng)]
    conn = Connection.random(2, 1, rng)
    with pytest.raises(ValueError):
        PseudoBialgebraMap("GL", V, conn)
    with pytest.raises(ValueError):
        PseudoBialgebraMap("tensor", V, conn)
    with pytest.raises(ValueError):
        PseudoBialgebraMap("MKW", V)
    with pytest.raises(ValueError):
        PseudoBialgebraMap("tensor", [])
    with pytest.raises(ValueError):
        PseudoBialgebraMap("GL", V).tree_field(parse_forest("[2]")[0])


def test_tensor_words_compose_fields():
    rng = random.Random(2)
    V1, V2 = random_field(2, 2, rng), random_field(2, 2, rng)
    fmap = PseudoBialgebraMap("tensor", [V1, V2])
    phi = random_polynomial(2, 3, rng)
    assert fmap((1, 2)).apply(phi) == V1.apply(V2.apply(phi))


def test_mkw_ladder_and_cherry():
    rng = random.Random(3)
    conn = Connection.random(2, 1, rng)
    V1, V2 = random_field(2, 2, rng), random_field(2, 2, rng)
    fmap = PseudoBialgebraMap("MKW", [V1, V2], conn)
    assert fmap.tree_field(parse_forest("[1:[2]]")[0]) == cov_deriv_vector(conn, V2, V1)
    ladder = fmap.tree_field(parse_forest("[1:[2:[1]]]")[0])
    assert ladder == cov_deriv_vector(conn, cov_deriv_vector(conn, V1, V2), V1)


@pytest.mark.parametrize("structure", ["tensor", "GL"])
def test_pseudo_bialgebra_flat(structure):
    rng = random.Random(4)
    fmap = PseudoBialgebraMap(structure, [random_field(2, 2, rng) for _ in range(2)])
    phi, psi = random_polynomial(2, 2, rng), random_polynomial(2, 2, rng)
    if structure == "tensor":
        keys = all_words(2, 2)
    else:
        keys = [f for k in range(3) for f in nonplanar_forests(k, 2)]
    for x in keys:
        for y in keys:
            d1, d2 = check_pseudo_bialgebra(fmap, x, y, phi, psi)
            assert d1.is_zero() and d2.is_zero()


def test_graft_compatibility_gl_flat():
    rng = random.Random(5)
    fmap = PseudoBialgebraMap("GL", [random_field(2, 2, rng) for _ in range(2)])
    for a in ("[1]", "[2:[1]]"):
        for b in ("[1]", "[1:[2]]"):
            assert check_graft_compatibility(fmap, parse_forest(a)[0], parse_forest(b)[0]).is_zero()


def test_graft_identity_pins_the_connection():
    rng = random.Random(6)
    V = [random_field(2, 2, rng) for _ in range(2)]
    good = PseudoBialgebraMap("MKW", V, Connection.random(2, 1, rng))
    other = Connection.random(2, 1, rng)
    t, s = parse_forest("[1]")[0], parse_forest("[2:[1]]")[0]
    assert check_graft_compatibility(good, t, s).is_zero()
    image = PolyVectorField.zero(2)
    for f, c in left_graft((t,), s).items():
        image = image + good.tree_field(f[0]) * c
    assert not (image - cov_deriv_vector(other, good.tree_field(t), good.tree_field(s))).is_zero()


def test_lie_map_extension_preserves_brackets():
    rng = random.Random(7)
    V1, V2 = random_field(2, 2, rng), random_field(2, 2, rng)
    ext = lie_map_extension({1: V1, 2: V2}, "tensor", 2)
    bracket = FormalSum.parse(WORDS, "1 * 12 + -1 * 21")
    assert ext(bracket).to_field() == vector_field_bracket(V1, V2)
    assert ext((1, 2)) == V1.as_operator().compose(V2.as_operator())
    with pytest.raises(KeyError):
        ext((3,))


def test_lie_map_extension_on_planar_forests():
    rng = random.Random(8)
    conn = Connection.random(2, 1, rng)
    V = [random_field(2, 1, rng) for _ in range(2)]
    fmap = PseudoBialgebraMap("MKW", V, conn)
    # trees are the primitives of the MKW structure
    gens = {t: fmap.tree_field(t) for k in (1, 2, 3) for t in planar_trees(k, 2)}
    ext = lie_map_extension(gens, "MKW", 2)
    for f in planar_forests(3, 2):
        assert ext(f) == fmap(f)


def test_level2_identity():
    rng = random.Random(9)
    for _ in range(2):
        assert level2_comparison([random_field(2, 2, rng) for _ in range(2)], Connection.random(2, 2, rng)) == {}
