"""Concrete algebras and maps, and random generators for property tests.

Constructors validate what they build: an algebra goes through
:func:`validate_algebra`, and :func:`make_map` audits the advertised isometry
(and inverse) on seeded samples before handing the map out.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .algebra import Algebra, Element, NormRule, norm, validate_algebra
from .engine import BallUnion, PartialIsometry, check_partial_isometry
from .errors import FixtureSelfCheckFailed, IncompatibleSpec, NormNotSubmultiplicative
from .radical import dickson_radical
from .spectral import PRINCIPAL

FORMS = ("SimilarityLinear", "TransposeLinear", "SimilarityConjugate", "TransposeConjugate")
DAME_BASIS = ("I", "E12", "E13", "E23")


# ---------------------------------------------------------------------------
# algebras

@functools.lru_cache(maxsize=None)
def make_matrix_algebra(n: int) -> Algebra:
    """``M_n`` over the matrix units ``E_ij`` (row-major), spectral norm."""
    if n < 1:
        raise ValueError("n must be positive")
    dim = n * n
    c = np.zeros((dim, dim, dim))
    for i in range(n):
        for j in range(n):
            for l in range(n):
                c[i * n + j, j * n + l, i * n + l] = 1.0
    emb = np.zeros((dim, n, n))
    for i in range(n):
        for j in range(n):
            emb[i * n + j, i, j] = 1.0
    return validate_algebra(dim, c, np.eye(n).reshape(-1), NormRule.MATRIX_OPERATOR, emb,
                            name=f"M{n}", principal_certificate=True)


@functools.lru_cache(maxsize=None)
def make_function_algebra(k: int) -> Algebra:
    """``C(X)`` for ``|X| = k`` over point indicators, sup norm."""
    if k < 1:
        raise ValueError("k must be positive")
    c = np.zeros((k, k, k))
    for i in range(k):
        c[i, i, i] = 1.0
    return validate_algebra(k, c, np.ones(k), NormRule.SUP, name=f"C{k}",
                            principal_certificate=True)


def matrix_to_element(algebra: Algebra, M) -> Element:
    return Element(algebra, np.asarray(M, dtype=complex).reshape(-1))


def element_to_matrix(a: Element) -> np.ndarray:
    n = int(round(np.sqrt(a.algebra.dim)))
    return a.coords.reshape(n, n)


def _dame_tables():
    emb = np.zeros((4, 3, 3))
    emb[0] = np.eye(3)
    emb[1, 0, 1] = emb[2, 0, 2] = emb[3, 1, 2] = 1.0
    zero_product = np.zeros((4, 4, 4))
    for j in range(4):
        zero_product[0, j, j] = zero_product[j, 0, j] = 1.0
    matrix_product = zero_product.copy()
    matrix_product[1, 3, 2] = 1.0        # E12 E23 = E13
    return emb, zero_product, matrix_product


def make_dame_pair(norm_choice: str = "auto") -> tuple[Algebra, Algebra]:
    """Two unitizations of the strictly upper triangular 3x3 matrices.

    Basis ``(I, E12, E13, E23)``; ``A`` multiplies the nilpotent part to zero,
    ``B`` uses the matrix product.  ``norm_choice``:

    ``"operator"``
        3x3 operator norm of the matrix, validated for both; raises
        :class:`NormNotSubmultiplicative` because the zero product violates it
        (``a = I + 0.65 E12 - 0.47 E13 + 0.65 E23`` gives ``||a^2|| > ||a||^2``).
    ``"unitization"``
        ``||alpha I + m|| = |alpha| + ||m||_op`` for both algebras, a norm
        equivalent to the operator norm that is submultiplicative for either
        product.
    ``"auto"``
        try ``"operator"``, fall back to ``"unitization"`` and record the
        refuting witness in ``Algebra.notes``.
    """
    return _dame_pair(norm_choice)


@functools.lru_cache(maxsize=None)
def _dame_pair(norm_choice):
    emb, zp, mp = _dame_tables()
    if norm_choice in ("operator", "auto"):
        try:
            A = validate_algebra(4, zp, [1, 0, 0, 0], NormRule.MATRIX_OPERATOR, emb,
                                 name="dameA", principal_certificate=True)
            B = validate_algebra(4, mp, [1, 0, 0, 0], NormRule.MATRIX_OPERATOR, emb,
                                 name="dameB", principal_certificate=True)
            return A, B
        except NormNotSubmultiplicative as exc:
            if norm_choice == "operator":
                raise
            ratio = exc.witness["ratio"]
            note = (f"operator norm refuted for the zero product "
                    f"(||ab||/(||a|| ||b||) = {ratio:.4f}); using |alpha| + ||m||_op")
    elif norm_choice == "unitization":
        note = "norm |alpha| + ||m||_op"
    else:
        raise ValueError(f"unknown norm choice {norm_choice!r}")
    rule = NormRule.UNITIZATION_OPERATOR
    A = validate_algebra(4, zp, [1, 0, 0, 0], rule, emb, name="dameA",
                         principal_certificate=True, notes=(note,))
    B = validate_algebra(4, mp, [1, 0, 0, 0], rule, emb, name="dameB",
                         principal_certificate=True, notes=(note,))
    return A, B


def dame_element(algebra: Algebra, alpha=0, e12=0, e13=0, e23=0) -> Element:
    return Element(algebra, [alpha, e12, e13, e23])


def catalog_algebras() -> dict[str, Algebra]:
    A, B = make_dame_pair()
    return {
        "C1": make_function_algebra(1),
        "C2": make_function_algebra(2),
        "C3": make_function_algebra(3),
        "M2": make_matrix_algebra(2),
        "M3": make_matrix_algebra(3),
        "dameA": A,
        "dameB": B,
    }


def build_algebra(desc: dict) -> Algebra:
    """Algebra from a scenario descriptor (see the cli module for the schema)."""
    kind = desc.get("kind")
    if kind == "matrix":
        return make_matrix_algebra(int(desc["n"]))
    if kind == "function":
        return make_function_algebra(int(desc["k"]))
    if kind in ("dame_A", "dame_B"):
        A, B = make_dame_pair(desc.get("norm", "auto"))
        return A if kind == "dame_A" else B
    if kind == "custom":
        from .serialize import decode_complex_array

        dim = int(desc["dim"])
        c = decode_complex_array(desc["structure_constants"]).reshape(dim, dim, dim)
        unit = decode_complex_array(desc["unit"])
        emb = desc.get("embedding")
        if emb is not None:
            emb = decode_complex_array(emb)
            n = int(round(np.sqrt(emb.size // dim)))
            emb = emb.reshape(dim, n, n)
        return validate_algebra(dim, c, unit, desc.get("norm_rule", "regular_rep_operator"),
                                emb, name=desc.get("name", "custom"),
                                principal_certificate=bool(desc.get("connected", False)))
    raise IncompatibleSpec(f"unknown algebra kind {kind!r}")


# ---------------------------------------------------------------------------
# random generators

def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_invertible(n: int, rng: np.random.Generator, max_cond: float = 50.0) -> np.ndarray:
    while True:
        U = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if np.linalg.cond(U) <= max_cond:
            return U


def apply_form(M: np.ndarray, form: str) -> np.ndarray:
    if form == "SimilarityLinear":
        return M
    if form == "TransposeLinear":
        return M.T
    if form == "SimilarityConjugate":
        return M.conj()
    if form == "TransposeConjugate":
        return M.conj().T
    raise ValueError(f"unknown form {form!r}")


# ---------------------------------------------------------------------------
# maps

def make_hoo_scenario(verify_pairs: int = 10_000, seed: int = 0) -> PartialIsometry:
    """Isometry of two disjoint balls in ``C({x, y})`` with no linear extension.

    On ``||f|| < 1`` the x-value is negated; on ``||f - (0, 10)|| < 1`` the map
    is the identity.
    """
    C2 = make_function_algebra(2)
    f0 = Element(C2, [0, 10])
    domain = BallUnion((C2.zero, f0), (1.0, 1.0))

    def forward(f):
        if norm(f) < 1:
            return Element(C2, [-f.coords[0], f.coords[1]])
        if norm(f - f0) < 1:
            return f
        from .errors import DomainViolation
        raise DomainViolation(f"{f!r} is outside both balls", witness={"f": f.coords})

    T = PartialIsometry(C2, C2, domain, forward, inverse=forward, codomain=domain,
                        name="hoo")
    if verify_pairs:
        self_check_map(T, verify_pairs, seed)
    return T


def self_check_map(T: PartialIsometry, pairs: int, seed: int, tol: float = 1e-9) -> dict:
    """Audit ``T`` on sampled pairs; raise if an advertised property fails."""
    audit = check_partial_isometry(T, pairs=pairs, seed=seed)
    if T.claims_isometry and audit["isometry_defect"] > tol:
        raise FixtureSelfCheckFailed(
            f"{T.name}: distance defect {audit['isometry_defect']:.3g} on sampled pairs")
    if audit["range_misses"]:
        raise FixtureSelfCheckFailed(f"{T.name}: {audit['range_misses']} images outside the range")
    if T.inverse is not None and audit["inverse_defect"] > tol:
        raise FixtureSelfCheckFailed(f"{T.name}: inverse defect {audit['inverse_defect']:.3g}")
    return audit


@dataclass
class ScenarioSpec:
    source_algebra: dict
    target_algebra: dict
    map_kind: str
    map_params: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    expect: dict = field(default_factory=dict)
    scenario_id: str = "scenario"
    extra: dict[str, Any] = field(default_factory=dict)


def _similarity_map(M: Algebra, U: np.ndarray, form: str):
    Uinv = np.linalg.inv(U)

    def forward(a):
        return matrix_to_element(M, U @ apply_form(element_to_matrix(a), form) @ Uinv)

    def inverse(b):
        X = Uinv @ element_to_matrix(b) @ U
        if form in ("TransposeLinear", "TransposeConjugate"):
            X = X.T
        if form in ("SimilarityConjugate", "TransposeConjugate"):
            X = X.conj()
        return matrix_to_element(M, X)

    return forward, inverse


def make_map(spec: ScenarioSpec, verify_pairs: int = 1000) -> PartialIsometry:
    """Build and self-check the map a scenario describes."""
    from .serialize import decode_complex_array

    kind = spec.map_kind
    p = spec.map_params
    if kind == "hoo":
        if spec.source_algebra != {"kind": "function", "k": 2} or spec.target_algebra != spec.source_algebra:
            raise IncompatibleSpec("hoo needs C({x,y}) on both sides")
        return make_hoo_scenario(verify_pairs=verify_pairs, seed=spec.seed)

    S = build_algebra(spec.source_algebra)
    Tgt = build_algebra(spec.target_algebra)
    claims_iso = bool(p.get("claims_isometry", True))
    if kind == "identity":
        if S is not Tgt:
            raise IncompatibleSpec("identity needs equal source and target")
        T = PartialIsometry(S, S, PRINCIPAL, lambda a: a, inverse=lambda b: b, codomain=PRINCIPAL,
                            claims_group_homomorphism=True, claims_unital=True, name="identity")
    elif kind == "dame_identity":
        if (S.name, Tgt.name) != ("dameA", "dameB"):
            raise IncompatibleSpec("dame_identity needs the dame pair (A -> B)")
        T = PartialIsometry(S, Tgt, PRINCIPAL, lambda a: Element(Tgt, a.coords),
                            inverse=lambda b: Element(S, b.coords), codomain=PRINCIPAL,
                            claims_unital=True, name="dame_identity")
    elif kind == "translation_by_radical":
        if S is not Tgt:
            raise IncompatibleSpec("translation needs equal source and target")
        u = Element(S, decode_complex_array(p["u"]))
        if not dickson_radical(S).contains(u):
            raise IncompatibleSpec("translation vector is not in the radical")
        T = PartialIsometry(S, S, PRINCIPAL, lambda a: a + u, inverse=lambda b: b - u,
                            codomain=PRINCIPAL, name="translation_by_radical")
    elif kind == "similarity":
        if S is not Tgt or not S.name.startswith("M"):
            raise IncompatibleSpec("similarity needs M_n on both sides")
        U = decode_complex_array(p["U"])
        n = int(round(np.sqrt(S.dim)))
        U = U.reshape(n, n)
        form = p.get("form", "SimilarityLinear")
        fwd, inv = _similarity_map(S, U, form)
        unitary = np.allclose(U.conj().T @ U, (U.conj().T @ U)[0, 0] * np.eye(n), atol=1e-12)
        if claims_iso and not unitary:
            raise IncompatibleSpec("similarity by a non-unitary U is not an isometry; "
                                   "set claims_isometry false")
        T = PartialIsometry(S, S, PRINCIPAL, fwd, inverse=inv, codomain=PRINCIPAL,
                            claims_group_homomorphism=form in ("SimilarityLinear", "SimilarityConjugate"),
                            claims_unital=True, claims_isometry=claims_iso, name=f"similarity:{form}")
    elif kind == "swap_coordinates":
        if S is not Tgt or S.norm_rule is not NormRule.SUP:
            raise IncompatibleSpec("swap_coordinates needs a function algebra")
        perm = np.array(p.get("perm", list(range(S.dim))[::-1]))
        if sorted(perm.tolist()) != list(range(S.dim)):
            raise IncompatibleSpec("perm must be a permutation")
        back = np.argsort(perm)
        T = PartialIsometry(S, S, PRINCIPAL, lambda a: Element(S, a.coords[perm]),
                            inverse=lambda b: Element(S, b.coords[back]), codomain=PRINCIPAL,
                            claims_group_homomorphism=True, claims_unital=True,
                            name="swap_coordinates")
    elif kind == "custom_table":
        mat = decode_complex_array(p["matrix"]).reshape(Tgt.dim, S.dim)
        conj = bool(p.get("conjugate", False))
        offset = decode_complex_array(p["offset"]) if "offset" in p else np.zeros(Tgt.dim)

        def fwd(a):
            x = a.coords.conj() if conj else a.coords
            return Element(Tgt, mat @ x + offset)

        inv = None
        if S.dim == Tgt.dim and abs(np.linalg.det(mat)) > 1e-12:
            minv = np.linalg.inv(mat)

            def inv(b):
                x = minv @ (b.coords - offset)
                return Element(S, x.conj() if conj else x)

        T = PartialIsometry(S, Tgt, PRINCIPAL, fwd, inverse=inv, codomain=PRINCIPAL,
                            claims_group_homomorphism=bool(p.get("homomorphism", False)),
                            claims_isometry=claims_iso, name="custom_table")
    else:
        raise IncompatibleSpec(f"unknown map kind {kind!r}")
    if verify_pairs:
        self_check_map(T, verify_pairs, spec.seed)
    return T


def unitary_conjugation(n: int, U: np.ndarray, form: str = "SimilarityLinear",
                        verify_pairs: int = 200, seed: int = 0) -> PartialIsometry:
    from .serialize import encode_complex_array

    spec = ScenarioSpec({"kind": "matrix", "n": n}, {"kind": "matrix", "n": n}, "similarity",
                        {"U": encode_complex_array(U), "form": form,
                         "claims_isometry": bool(np.allclose(U.conj().T @ U, np.eye(n)))},
                        seed=seed)
    return make_map(spec, verify_pairs=verify_pairs)


# ---------------------------------------------------------------------------
# finite sets for the reflection check

def symmetric_orbit_set(n: int, m: int, rng: np.random.Generator):
    """A finite set in ``M_n`` symmetric about a central ``c``, and a self-isometry.

    The set is ``{c} u {c +- V^j X V^-j}`` for ``V = diag(1, w, ..., w^(n-1))``
    with ``w^m = 1``; conjugation by the unitary ``V`` permutes it.  Returns
    ``(points, c, map)``.
    """
    M = make_matrix_algebra(n)
    w = np.exp(2j * np.pi / m)
    V = np.diag(w ** np.arange(n))
    Vi = V.conj().T
    lam = complex(rng.standard_normal() + 1j * rng.standard_normal())
    C = lam * np.eye(n)
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    pts = [C]
    Y = X
    for _ in range(m):
        pts += [C + Y, C - Y]
        Y = V @ Y @ Vi
    points = [matrix_to_element(M, P) for P in pts]

    def conj(a):
        return matrix_to_element(M, V @ element_to_matrix(a) @ Vi)

    return points, matrix_to_element(M, C), conj


def asymmetric_counterexample():
    """``{0, 1, 3}`` in ``C`` with centre ``1``: the reflection of ``0`` is missing."""
    C1 = make_function_algebra(1)
    points = [Element(C1, [0]), Element(C1, [1]), Element(C1, [3])]
    return points, points[1], (lambda a: a)
