import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from isolab.algebra import Element
from isolab.catalog import (
    catalog_algebras,
    dame_element,
    make_dame_pair,
    make_function_algebra,
    make_matrix_algebra,
    matrix_to_element,
)
from isolab.errors import RadicalDisagreement
from isolab.radical import dickson_radical, radical_test_spectral, trace_form
from isolab.spectral import principal_sampler, spectral_radius

ALGEBRAS = catalog_algebras()


@pytest.mark.parametrize("name", ["C1", "C2", "C3", "M2", "M3"])
def test_semisimple_catalog(name):
    assert dickson_radical(ALGEBRAS[name]).dim_radical == 0


@pytest.mark.parametrize("which", [0, 1])
def test_dame_radical_is_strictly_upper(which):
    alg = make_dame_pair()[which]
    rad = dickson_radical(alg)
    assert rad.dim_radical == 3
    basis = np.array([b.coords for b in rad.basis])
    assert np.all(basis[:, 0] == 0)
    assert np.linalg.matrix_rank(basis[:, 1:]) == 3


def test_radical_basis_has_exact_zeros():
    # exact zeros keep eigenvalues of nilpotent products exactly zero
    for alg in make_dame_pair():
        for b in dickson_radical(alg).basis:
            nz = np.flatnonzero(b.coords)
            assert len(nz) == 1 and b.coords[nz[0]] == 1


def test_trace_form_of_matrix_algebra():
    # tr(L_{E_ij E_kl}) = n tr(E_ij E_kl) = n delta_jk delta_il
    G = trace_form(make_matrix_algebra(2))
    expected = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            expected[i * 2 + j, j * 2 + i] = 2
    np.testing.assert_allclose(G, expected)


def test_zero_is_consistent():
    M2 = make_matrix_algebra(2)
    v = radical_test_spectral(M2.zero, principal_sampler(M2, np.random.default_rng(0)), trials=50)
    assert v.consistent


def test_matrix_unit_has_witness():
    M2 = make_matrix_algebra(2)
    a = matrix_to_element(M2, [[0, 1], [0, 0]])
    b = matrix_to_element(M2, [[0, 1], [1, 0]])
    v = radical_test_spectral(a, iter([b]), trials=1)
    assert v.verdict == "NotRadical"
    assert v.radius == pytest.approx(1.0)


def test_dame_e13_consistent():
    B = make_dame_pair()[1]
    v = radical_test_spectral(dame_element(B, e13=1), principal_sampler(B, np.random.default_rng(1)))
    assert v.consistent and v.radius <= 1e-12


def test_cross_check_raises_on_disagreement():
    A = make_dame_pair()[0]
    u = dame_element(A, e12=1)
    # a negative threshold turns every trial into a witness
    with pytest.raises(RadicalDisagreement):
        radical_test_spectral(u, iter([A.unit]), trials=1, threshold=-1.0)


@pytest.mark.parametrize("which", [0, 1])
def test_radical_elements_are_quasinilpotent_in_products(which):
    alg = make_dame_pair()[which]
    sampler = principal_sampler(alg, np.random.default_rng(7))
    for u in dickson_radical(alg).basis:
        for _ in range(50):
            assert spectral_radius(next(sampler) * u) <= 1e-8


@seed(31)
@settings(max_examples=25, deadline=None)
@given(st.sampled_from(sorted(ALGEBRAS)), st.integers(0, 2**32 - 1))
def test_two_routes_agree(name, s):
    alg = ALGEBRAS[name]
    rng = np.random.default_rng(s)
    rad = dickson_radical(alg)
    a = rad.random_element(rng) if (s % 2 and rad.dim_radical) else alg.random_element(rng)
    v = radical_test_spectral(a, principal_sampler(alg, rng), trials=500)
    assert v.consistent == rad.contains(a)


def test_function_algebra_point_mass_not_radical():
    C3 = make_function_algebra(3)
    v = radical_test_spectral(Element(C3, [0, 0, 1]),
                              principal_sampler(C3, np.random.default_rng(0)), trials=10)
    assert v.verdict == "NotRadical"
