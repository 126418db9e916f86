import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from isolab.catalog import (
    FORMS,
    ScenarioSpec,
    apply_form,
    dame_element,
    make_dame_pair,
    make_map,
    make_matrix_algebra,
    matrix_to_element,
    random_invertible,
    random_unitary,
    unitary_conjugation,
)
from isolab.classify import (
    check_multiplicativity,
    classify_matrix_isometry,
    comsem_pipeline,
    group_iso_extension_pipeline,
    normalize_gauge,
)
from isolab.engine import PartialIsometry
from isolab.errors import (
    AmbiguousForm,
    FlagContradiction,
    HomomorphismClaimFalse,
    SamplerExhausted,
)
from isolab.spectral import PRINCIPAL, SubgroupDescriptor


def dame_identity():
    return make_map(ScenarioSpec({"kind": "dame_A"}, {"kind": "dame_B"}, "dame_identity"),
                    verify_pairs=100)


def form_map(U, form):
    Ui = np.linalg.inv(U)
    return lambda M: U @ apply_form(M, form) @ Ui


def test_identity_is_multiplicative():
    M2 = make_matrix_algebra(2)
    T = PartialIsometry(M2, M2, PRINCIPAL, lambda a: a)
    rep = check_multiplicativity(T, pairs=50)
    assert rep.verdict == "Multiplicative" and rep.mult_residual == 0.0


def test_dame_identity_neither_with_e13_witness():
    A, B = make_dame_pair()
    pairs = [(dame_element(A, 1, e12=1), dame_element(A, 1, e23=1)),
             (dame_element(A, 1, e23=1), dame_element(A, 1, e12=1))]
    rep = check_multiplicativity(dame_identity(), pairs=0, explicit_pairs=pairs)
    assert rep.verdict == "Neither"
    assert rep.mult_residual == pytest.approx(1.0)
    assert rep.antimult_residual == pytest.approx(1.0)


def test_transpose_is_antimultiplicative():
    M2 = make_matrix_algebra(2)
    T = PartialIsometry(M2, M2, PRINCIPAL,
                        lambda a: matrix_to_element(M2, a.coords.reshape(2, 2).T))
    a = matrix_to_element(M2, [[1, 1], [0, 1]])
    b = matrix_to_element(M2, [[1, 0], [1, 1]])
    rep = check_multiplicativity(T, pairs=50, explicit_pairs=[(a, b)])
    assert rep.verdict == "AntiMultiplicative"
    assert rep.mult_residual >= 1


def test_sampler_exhaustion():
    M2 = make_matrix_algebra(2)
    never = SubgroupDescriptor("custom_predicate", lambda a: False)
    T = PartialIsometry(M2, M2, never, lambda a: a)
    with pytest.raises(SamplerExhausted):
        check_multiplicativity(T, sampler=iter(lambda: M2.unit, None), pairs=3)


def test_group_iso_pipeline_passes_on_conjugation():
    U = random_unitary(2, np.random.default_rng(2))
    rep = group_iso_extension_pipeline(unitary_conjugation(2, U, verify_pairs=50), pairs=50)
    assert rep.verdict == "IsometricAlgebraIsomorphism"
    assert all(v <= 1e-9 for _, v in rep.checks.values())


def test_group_iso_pipeline_on_function_algebra_identity():
    T = make_map(ScenarioSpec({"kind": "function", "k": 2}, {"kind": "function", "k": 2},
                              "identity"), verify_pairs=50)
    assert group_iso_extension_pipeline(T, pairs=50).passed


def test_group_iso_rejects_translation_and_dame():
    T = make_map(ScenarioSpec({"kind": "dame_B"}, {"kind": "dame_B"}, "translation_by_radical",
                              {"u": [0, 0, 1, 0]}), verify_pairs=50)
    with pytest.raises(HomomorphismClaimFalse) as info:
        group_iso_extension_pipeline(T, pairs=50)
    assert info.value.witness["unit_defect"] == pytest.approx(1.0)
    with pytest.raises(HomomorphismClaimFalse):
        group_iso_extension_pipeline(dame_identity(), pairs=50)


def test_comsem_examples():
    swap = make_map(ScenarioSpec({"kind": "function", "k": 2}, {"kind": "function", "k": 2},
                                 "swap_coordinates"), verify_pairs=50)
    rep = comsem_pipeline(swap, True, True, pairs=50)
    assert rep.verdict == "ConclusionsHold" and len(rep.checks) == 3
    c1 = make_map(ScenarioSpec({"kind": "function", "k": 1}, {"kind": "function", "k": 1},
                               "identity"), verify_pairs=50)
    assert comsem_pipeline(c1, True, True, pairs=50).passed
    with pytest.raises(FlagContradiction):
        comsem_pipeline(dame_identity(), True, True)


def test_classify_identity():
    res = classify_matrix_isometry(lambda M: M, 2)
    assert res.form == "SimilarityLinear"
    np.testing.assert_allclose(res.U, np.eye(2) / np.sqrt(2), atol=1e-12)
    assert res.residual <= 1e-12


def test_classify_transpose_with_shear():
    U = np.array([[1, 1], [0, 1]], dtype=complex)
    res = classify_matrix_isometry(form_map(U, "TransposeLinear"), 2, samples=40)
    assert res.form == "TransposeLinear"
    assert res.residual <= 1e-8
    np.testing.assert_allclose(res.U, normalize_gauge(U), atol=1e-10)
    # re-substitution
    M = np.array([[1, 2j], [3, -1]])
    np.testing.assert_allclose(res.U @ M.T @ np.linalg.inv(res.U), form_map(U, "TransposeLinear")(M),
                               atol=1e-10)


def test_classify_rejects_affine_shift():
    res = classify_matrix_isometry(lambda M: M + np.eye(2), 2)
    assert res.form == "NoFormFits"
    assert min(res.residuals.values()) >= 0.1


def test_classify_sample_count_guard():
    with pytest.raises(ValueError):
        classify_matrix_isometry(lambda M: M, 2, samples=3)
    with pytest.raises(ValueError):
        classify_matrix_isometry(lambda M: M, 1)


def test_classify_ambiguity_reported():
    # generic samples separate the forms, so only a tolerance loose enough to admit all of them is ambiguous
    with pytest.raises(AmbiguousForm) as info:
        classify_matrix_isometry(lambda M: M, 2, tol=1.0)
    assert set(info.value.witness["residuals"]) == set(FORMS)


def test_classify_on_partial_isometry():
    U = random_unitary(3, np.random.default_rng(8))
    T = unitary_conjugation(3, U, form="TransposeConjugate", verify_pairs=50)
    res = classify_matrix_isometry(T, 3)
    assert res.form == "TransposeConjugate"
    np.testing.assert_allclose(res.U, normalize_gauge(U), atol=1e-8)


@seed(61)
@settings(max_examples=24, deadline=None)
@given(st.integers(2, 4), st.sampled_from(FORMS), st.integers(0, 2**32 - 1))
def test_round_trip_and_form_semantics(n, form, s):
    rng = np.random.default_rng(s)
    U = random_invertible(n, rng)
    S = form_map(U, form)
    res = classify_matrix_isometry(S, n, seed=s % 1000)
    assert res.form == form
    assert np.linalg.norm(res.U - normalize_gauge(U)) <= 1e-6
    M = make_matrix_algebra(n)
    T = PartialIsometry(M, M, PRINCIPAL, lambda a: matrix_to_element(M, S(a.coords.reshape(n, n))))
    verdict = check_multiplicativity(T, pairs=10, seed=1).verdict
    assert verdict == ("AntiMultiplicative" if form.startswith("Transpose") else "Multiplicative")


@seed(62)
@settings(max_examples=12, deadline=None)
@given(st.integers(2, 3), st.sampled_from(FORMS), st.integers(0, 2**32 - 1))
def test_left_scale_changes_only_scale(n, form, s):
    rng = np.random.default_rng(s)
    U = random_invertible(n, rng)
    G = random_invertible(n, rng)
    S = form_map(U, form)
    plain = classify_matrix_isometry(S, n, seed=3)
    scaled = classify_matrix_isometry(lambda M: G @ S(M), n, seed=3)
    assert scaled.form == plain.form == form
    np.testing.assert_allclose(scaled.U, plain.U, atol=1e-8)
    np.testing.assert_allclose(scaled.scale, G, atol=1e-10)
