import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from isolab.algebra import Element, norm, validate_algebra
from isolab.catalog import (
    catalog_algebras,
    dame_element,
    make_dame_pair,
    make_function_algebra,
    make_matrix_algebra,
    matrix_to_element,
)
from isolab.errors import NotInvertible, UnknownComponentStructure
from isolab.spectral import (
    FULL_GROUP,
    PRINCIPAL,
    SubgroupDescriptor,
    check_subgroup_closure,
    exp_element,
    gelfand_radius,
    in_omega,
    in_subgroup,
    invert,
    is_invertible,
    principal_sampler,
    spectral_radius,
    spectrum,
)

import oracles

ALGEBRAS = catalog_algebras()
M2 = make_matrix_algebra(2)
C2 = make_function_algebra(2)
E12 = matrix_to_element(M2, [[0, 1], [0, 0]])


def test_invert_unit():
    for alg in ALGEBRAS.values():
        np.testing.assert_allclose(invert(alg.unit).coords, alg.unit_coords, atol=1e-15)


@pytest.mark.parametrize("which", [0, 1])
def test_dame_inverse_formula(which):
    alg = make_dame_pair()[which]
    rng = np.random.default_rng(which)
    for _ in range(10):
        alpha = complex(rng.standard_normal(), rng.standard_normal())
        m = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        a = Element(alg, np.concatenate([[alpha], m]))
        inv = invert(a)
        if which == 0:
            expected = np.concatenate([[1 / alpha], -m / alpha**2])
            np.testing.assert_allclose(inv.coords, expected, rtol=1e-12, atol=1e-12)
        else:
            M = oracles.dame_matrix(a.coords)
            Mi = np.linalg.inv(M)
            np.testing.assert_allclose(inv.coords, [Mi[0, 0], Mi[0, 1], Mi[0, 2], Mi[1, 2]],
                                       rtol=1e-12, atol=1e-12)


def test_dame_invertible_iff_alpha_nonzero():
    for alg in make_dame_pair():
        assert is_invertible(dame_element(alg, 0.3, 1, 2, 3))
        assert not is_invertible(dame_element(alg, 0, 1, 2, 3))


def test_nilpotent_not_invertible():
    with pytest.raises(NotInvertible):
        invert(E12)


def test_spectrum_examples():
    sp = spectrum(M2.unit * 3.0)
    np.testing.assert_allclose(sp.eigenvalues, [3] * 4)
    assert sp.spectral_radius == pytest.approx(3.0)
    sp = spectrum(Element(C2, [0, 10]))
    np.testing.assert_allclose(sorted(sp.eigenvalues.real), [0, 10], atol=1e-14)
    assert spectral_radius(E12) == 0.0


def test_gelfand_examples():
    assert gelfand_radius(M2.unit, 64) == pytest.approx(1.0)
    assert gelfand_radius(E12, 2) == 0.0
    assert gelfand_radius(matrix_to_element(M2, np.diag([2, 1])), 64) == pytest.approx(2.0, abs=1e-9)
    assert gelfand_radius(M2.zero) == 0.0


def test_gelfand_rescales_on_overflow():
    a = matrix_to_element(M2, np.diag([1e10, 1.0]))
    assert gelfand_radius(a, 128) == pytest.approx(1e10, rel=1e-9)


def test_gelfand_rejects_bad_power():
    with pytest.raises(ValueError):
        gelfand_radius(M2.unit, 100)


def test_subgroup_membership():
    assert in_subgroup(M2.unit, PRINCIPAL)
    assert in_subgroup(matrix_to_element(M2, np.diag([1, -1])), PRINCIPAL)
    assert not in_subgroup(E12, FULL_GROUP)
    custom = SubgroupDescriptor("custom_predicate", lambda a: a.coords[0].real > 0)
    assert in_subgroup(M2.unit, custom)


def test_principal_component_needs_certificate():
    c = np.zeros((2, 2, 2))
    c[0, 0, 0] = c[1, 1, 1] = 1
    alg = validate_algebra(2, c, [1, 1])
    with pytest.raises(UnknownComponentStructure):
        in_subgroup(alg.unit, PRINCIPAL)
    assert in_subgroup(alg.unit, FULL_GROUP)


def test_omega_examples():
    for alg in ALGEBRAS.values():
        assert in_omega(alg.unit)
        assert not in_omega(-alg.unit)
        assert not in_omega(alg.zero)


def test_exp_examples():
    assert np.allclose(exp_element(M2.zero).coords, M2.unit_coords)
    C1 = make_function_algebra(1)
    assert exp_element(Element(C1, [np.log(2)])).coords[0] == pytest.approx(2.0)
    np.testing.assert_allclose(exp_element(E12).coords, (M2.unit + E12).coords, atol=1e-15)


def test_subgroup_closure_on_samples():
    for alg in ALGEBRAS.values():
        assert check_subgroup_closure(PRINCIPAL, alg, np.random.default_rng(0), samples=20) == []


@seed(21)
@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(ALGEBRAS)), st.integers(0, 2**32 - 1))
def test_inverse_spectrum_reciprocal(name, s):
    alg = ALGEBRAS[name]
    a = next(principal_sampler(alg, np.random.default_rng(s)))
    ev = np.sort_complex(spectrum(a).eigenvalues)
    ev_inv = np.sort_complex(1 / spectrum(invert(a)).eigenvalues)
    # match as multisets by greedy nearest pairing
    rest = list(ev_inv)
    for z in ev:
        k = int(np.argmin([abs(z - w) for w in rest]))
        assert abs(z - rest.pop(k)) <= 1e-8 * max(1.0, abs(z))


@seed(22)
@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(ALGEBRAS)), st.integers(0, 2**32 - 1))
def test_spectral_radius_of_products_commutes(name, s):
    alg = ALGEBRAS[name]
    rng = np.random.default_rng(s)
    a, b = alg.random_element(rng), alg.random_element(rng)
    assert spectral_radius(a * b) == pytest.approx(spectral_radius(b * a), abs=1e-8)


@seed(23)
@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(ALGEBRAS)), st.integers(0, 2**32 - 1))
def test_gelfand_between_radius_and_norm(name, s):
    alg = ALGEBRAS[name]
    a = alg.random_element(np.random.default_rng(s))
    g = gelfand_radius(a, 128)
    assert spectral_radius(a) - 1e-6 <= g <= norm(a) + 1e-6


@seed(24)
@settings(max_examples=30, deadline=None)
@given(st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_gelfand_close_for_normal_matrices(n, s):
    rng = np.random.default_rng(s)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    d = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    a = matrix_to_element(make_matrix_algebra(n), q @ np.diag(d) @ q.conj().T)
    r = oracles.spectral_radius_matrix(q @ np.diag(d) @ q.conj().T)
    assert gelfand_radius(a, 128) == pytest.approx(r, rel=0.05)


@seed(25)
@settings(max_examples=40, deadline=None)
@given(st.sampled_from(sorted(ALGEBRAS)), st.integers(0, 2**32 - 1))
def test_omega_inside_principal_component(name, s):
    alg = ALGEBRAS[name]
    a = alg.random_element(np.random.default_rng(s))
    shifted = a + alg.unit * (2 * norm(a))
    assert in_omega(shifted)
    assert is_invertible(shifted) and in_subgroup(shifted, PRINCIPAL)
    if in_omega(a):
        assert is_invertible(a)


def test_matrix_spectrum_matches_eigenvalues():
    rng = np.random.default_rng(5)
    M3 = make_matrix_algebra(3)
    X = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    ev = spectrum(matrix_to_element(M3, X)).eigenvalues
    for z in np.linalg.eigvals(X):
        assert np.sum(np.abs(ev - z) < 1e-8) == 3
