import functools

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from isolab.algebra import (
    Element,
    NormRule,
    norm,
    norm_coords,
    regular_rep,
    unit_excess,
    validate_algebra,
)
from isolab.catalog import (
    _dame_tables,
    catalog_algebras,
    dame_element,
    make_dame_pair,
    make_function_algebra,
    make_matrix_algebra,
    matrix_to_element,
)
from isolab.errors import (
    AlgebraMismatch,
    BadUnit,
    MissingEmbedding,
    NonAssociative,
    NormNotSubmultiplicative,
)

import oracles

ALGEBRAS = catalog_algebras()


def test_scalar_field_is_valid():
    C = validate_algebra(1, [[[1.0]]], [1.0])
    assert norm(Element(C, [3 - 4j])) == pytest.approx(5.0)


def test_matrix_units_valid():
    M2 = make_matrix_algebra(2)
    assert M2.dim == 4
    assert not M2.is_commutative()


def test_nonassociative_perturbation_rejected():
    M2 = make_matrix_algebra(2)
    c = M2.structure_constants.copy()
    c[1, 2, 0] += 0.1          # E12 E21 picks up a stray E11
    with pytest.raises(NonAssociative):
        validate_algebra(4, c, M2.unit_coords)


def test_bad_unit_rejected():
    M2 = make_matrix_algebra(2)
    with pytest.raises(BadUnit):
        validate_algebra(4, M2.structure_constants, [1, 0, 0, 0])


def test_matrix_operator_needs_embedding():
    M2 = make_matrix_algebra(2)
    with pytest.raises(MissingEmbedding):
        validate_algebra(4, M2.structure_constants, M2.unit_coords, "matrix_operator")


def test_dame_operator_norm_refuted_with_witness():
    with pytest.raises(NormNotSubmultiplicative) as info:
        make_dame_pair("operator")
    w = info.value.witness
    a, b = w["a"], w["b"]
    ab = oracles.dame_product_A(a, b)
    op = lambda x: np.linalg.norm(oracles.dame_matrix(x), 2)
    assert op(ab) > op(a) * op(b) * (1 + 1e-9)
    assert w["ratio"] == pytest.approx(op(ab) / (op(a) * op(b)), rel=1e-9)


def test_dame_fallback_flagged_and_submultiplicative():
    A, B = make_dame_pair()
    assert A.norm_rule is NormRule.UNITIZATION_OPERATOR
    assert any("refuted" in n for n in A.notes)
    # |alpha| + ||m||_op keeps the unit and E13 at norm 1
    assert norm(A.unit) == 1.0
    assert norm(dame_element(A, e13=1)) == 1.0


def test_dame_products():
    A, B = make_dame_pair()
    a, b = dame_element(A, 1, e12=1), dame_element(A, 1, e23=1)
    np.testing.assert_allclose((a * b).coords, [1, 1, 0, 1])
    a, b = dame_element(B, 1, e12=1), dame_element(B, 1, e23=1)
    np.testing.assert_allclose((a * b).coords, [1, 1, 1, 1])


def test_dame_commutativity():
    A, B = make_dame_pair()
    assert A.is_commutative()
    assert not B.is_commutative()


def test_unit_is_identity_rep():
    for alg in ALGEBRAS.values():
        np.testing.assert_allclose(regular_rep(alg.unit), np.eye(alg.dim), atol=1e-15)
        assert norm(alg.unit) == pytest.approx(1.0, abs=1e-15)


def test_function_algebra_rep_and_norm():
    C2 = make_function_algebra(2)
    np.testing.assert_allclose(regular_rep(Element(C2, [2, 3])), np.diag([2, 3]))
    assert norm(Element(C2, [0, 10])) == 10.0


def test_matrix_unit_norm():
    M2 = make_matrix_algebra(2)
    assert norm(matrix_to_element(M2, [[0, 1], [0, 0]])) == pytest.approx(1.0)


def test_mismatched_algebras():
    M2, C2 = make_matrix_algebra(2), make_function_algebra(2)
    with pytest.raises(AlgebraMismatch):
        M2.unit + Element(C2, [1, 1])


@seed(11)
@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(ALGEBRAS)), st.integers(0, 2**32 - 1))
def test_regular_rep_is_homomorphism(name, s):
    alg = ALGEBRAS[name]
    rng = np.random.default_rng(s)
    a, b = alg.random_element(rng), alg.random_element(rng)
    err = np.linalg.norm(regular_rep(a * b) - regular_rep(a) @ regular_rep(b))
    assert err <= 1e-12 * max(1.0, norm(a) * norm(b))
    np.testing.assert_allclose(regular_rep(a) @ alg.unit_coords, a.coords, atol=1e-14)


@seed(12)
@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(ALGEBRAS)), st.integers(0, 2**32 - 1))
def test_norm_axioms(name, s):
    alg = ALGEBRAS[name]
    rng = np.random.default_rng(s)
    a, b = alg.random_element(rng), alg.random_element(rng)
    lam = complex(rng.standard_normal(), rng.standard_normal())
    assert norm(a + b) <= norm(a) + norm(b) + 1e-12
    assert norm(a * lam) == pytest.approx(abs(lam) * norm(a), rel=1e-12)
    assert norm(a * b) <= norm(a) * norm(b) * (1 + 1e-9)


@functools.lru_cache(maxsize=None)
def _regular_rep_matrix_algebra(n):
    M = make_matrix_algebra(n)
    return validate_algebra(n * n, M.structure_constants, M.unit_coords, "regular_rep_operator")


@seed(13)
@settings(max_examples=30, deadline=None)
@given(st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_regular_rep_norm_matches_spectral_norm(n, s):
    M = make_matrix_algebra(n)
    R = _regular_rep_matrix_algebra(n)
    x = np.random.default_rng(s).standard_normal(n * n) + 0j
    assert norm_coords(R, x) == pytest.approx(norm_coords(M, x), rel=1e-9)


@seed(14)
@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(ALGEBRAS)), st.integers(0, 2**32 - 1),
       st.floats(1e-3, 1.0))
def test_unit_excess_matches_direct_subtraction(name, s, scale):
    alg = ALGEBRAS[name]
    x = alg.random_element(np.random.default_rng(s), scale).coords
    direct = norm_coords(alg, x + alg.unit_coords) - 1.0
    assert unit_excess(alg, x) == pytest.approx(direct, abs=1e-13)


def test_unit_excess_keeps_relative_accuracy():
    M2 = make_matrix_algebra(2)
    s = 1e-12
    x = np.array([0, 1, 0, 0], dtype=complex) * s
    # sigma_max(I + s E12) = sqrt(1 + s^2/4) + s/2
    expected = np.sqrt(1 + s * s / 4) + s / 2 - 1
    assert unit_excess(M2, x) == pytest.approx(expected, rel=1e-9)


def test_dame_tables_match_matrix_products():
    rng = np.random.default_rng(0)
    A, B = make_dame_pair()
    for _ in range(20):
        x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        y = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        np.testing.assert_allclose((Element(A, x) * Element(A, y)).coords,
                                   oracles.dame_product_A(x, y), atol=1e-13)
        np.testing.assert_allclose((Element(B, x) * Element(B, y)).coords,
                                   oracles.dame_product_B(x, y), atol=1e-13)
    emb, _, _ = _dame_tables()
    assert emb.shape == (4, 3, 3)
