"""Multiplicativity of maps, the group-isomorphism and commutative/semisimple
pipelines, and the four-form classifier for isometries of ``M_n^{-1}``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

import numpy as np

from .algebra import Element, commutativity_residual, norm
from .catalog import FORMS, apply_form, element_to_matrix, matrix_to_element
from .engine import (
    ExtensionReport,
    PartialIsometry,
    estimate_u0,
    extend_isometry,
    in_domain,
    sample_domain,
)
from .errors import (
    AmbiguousForm,
    FlagContradiction,
    HomomorphismClaimFalse,
    SamplerExhausted,
    SingularRecoveredU,
)
from .radical import dickson_radical
from .spectral import invert, principal_sampler

MULT_TOL = 1e-8
COMMUTATIVE_TOL = 1e-12
FORM_TOL = 1e-8
MIN_RCOND = 1e-10


# ---------------------------------------------------------------------------
# multiplicativity

@dataclass
class MultiplicativityReport:
    mult_residual: float
    antimult_residual: float
    verdict: str          # Multiplicative | AntiMultiplicative | Both | Neither
    pairs: int
    mult_witness: tuple[Element, Element] | None = None
    antimult_witness: tuple[Element, Element] | None = None
    tolerance: float = MULT_TOL


def _default_sampler(T, rng) -> Iterator[Element]:
    domain = getattr(T, "domain", None)
    if domain is None:
        while True:
            yield T.source.random_element(rng)
    if isinstance(T, PartialIsometry) and T.is_subgroup_domain:
        yield from principal_sampler(T.source, rng)
    while True:
        yield sample_domain(domain, T.source, rng)


def check_multiplicativity(T, sampler: Iterable[Element] | None = None, pairs: int = 200,
                           seed: int = 0, tol: float = MULT_TOL,
                           explicit_pairs: Iterable[tuple[Element, Element]] = ()
                           ) -> MultiplicativityReport:
    """Largest ``||T(ab) - T(a)T(b)||`` and ``||T(ab) - T(b)T(a)||`` over pairs.

    ``T`` is a :class:`PartialIsometry` (pairs must keep ``a``, ``b`` and
    ``ab`` in its domain) or a :class:`LinearCandidate` (any pair).
    ``explicit_pairs`` are evaluated in addition to ``pairs`` sampled ones.
    """
    rng = np.random.default_rng(seed)
    it = iter(sampler) if sampler is not None else _default_sampler(T, rng)
    domain = getattr(T, "domain", None)
    chosen = list(explicit_pairs)
    found, attempts = 0, 0
    while found < pairs:
        if attempts >= 100 * pairs:
            raise SamplerExhausted(f"only {found} of {pairs} valid pairs in {attempts} attempts",
                                   witness={"found": found, "attempts": attempts})
        attempts += 1
        a, b = next(it), next(it)
        if domain is not None and not (in_domain(a, domain) and in_domain(b, domain)
                                       and in_domain(a * b, domain)):
            continue
        chosen.append((a, b))
        found += 1

    mult = anti = -1.0
    mw = aw = None
    for a, b in chosen:
        Tab, Ta, Tb = T(a * b), T(a), T(b)
        m, r = norm(Tab - Ta * Tb), norm(Tab - Tb * Ta)
        if m > mult:
            mult, mw = m, (a, b)
        if r > anti:
            anti, aw = r, (a, b)
    is_mult, is_anti = mult <= tol, anti <= tol
    if is_mult and is_anti and commutativity_residual(T.target) <= COMMUTATIVE_TOL:
        verdict = "Both"
    elif is_mult:
        verdict = "Multiplicative"
    elif is_anti:
        verdict = "AntiMultiplicative"
    else:
        verdict = "Neither"
    return MultiplicativityReport(mult, anti, verdict, len(chosen), mw, aw, tol)


# ---------------------------------------------------------------------------
# pipelines

@dataclass
class PipelineReport:
    verdict: str
    checks: dict[str, tuple[bool, float]] = field(default_factory=dict)
    extension: ExtensionReport | None = None
    multiplicativity: MultiplicativityReport | None = None

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.checks.values())


def group_iso_extension_pipeline(T: PartialIsometry, pairs: int = 200, seed: int = 0,
                                 tol: float = MULT_TOL) -> PipelineReport:
    """A unital isometric group isomorphism extends to an isometric real-algebra isomorphism.

    The homomorphism property is verified on ``pairs`` sampled pairs first;
    then ``u0 = 0`` is checked, the extension is built, and its
    multiplicativity on all of ``A`` is measured together with the shift
    identity ``Tt(a) = T(a + r e) - r T(e)`` for ``r > ||a||``.
    """
    A, B = T.source, T.target
    hom = check_multiplicativity(T, pairs=pairs, seed=seed, tol=tol)
    unit_defect = norm(T(A.unit) - B.unit)
    if hom.mult_residual > tol or unit_defect > tol:
        a, b = hom.mult_witness
        raise HomomorphismClaimFalse(
            f"T(ab) - T(a)T(b) = {hom.mult_residual:.3g}, T(e) - e = {unit_defect:.3g}",
            witness={"a": a.coords, "b": b.coords, "mult_residual": hom.mult_residual,
                     "unit_defect": unit_defect})
    u0 = estimate_u0(T)
    cand, ext = extend_isometry(T, seed=seed, tol=tol)
    ext_mult = check_multiplicativity(cand, pairs=pairs, seed=seed + 1, tol=tol)

    rng = np.random.default_rng(seed + 2)
    shift = 0.0
    for _ in range(pairs):
        a = A.random_element(rng)
        r = 2.0 * norm(a) + 1.0
        shift = max(shift, norm(cand(a) - (T(a + A.unit * r) - T(A.unit) * r)))
    checks = {
        "homomorphism": (True, hom.mult_residual),
        "u0_zero": (norm(u0) <= 1e-9, norm(u0)),
        "extension": (ext.extends, max(v for v in ext.residuals().values() if v is not None)),
        "extension_multiplicative": (ext_mult.mult_residual <= tol, ext_mult.mult_residual),
        "shift_identity": (shift <= tol, shift),
    }
    ok = all(c[0] for c in checks.values())
    return PipelineReport("IsometricAlgebraIsomorphism" if ok else "FailsPipeline", checks,
                          ext, ext_mult)


def comsem_pipeline(T: PartialIsometry, a_commutative: bool, b_semisimple: bool,
                    pairs: int = 200, seed: int = 0, tol: float = MULT_TOL) -> PipelineReport:
    """Commutative source and semisimple target: check the three conclusions.

    The declared flags are confirmed first.  ``T' = T(e)^{-1} T`` is extended
    and the report carries one verdict each for multiplicativity of the
    extension, commutativity of the target and semisimplicity of the source.
    """
    A, B = T.source, T.target
    comm_a = commutativity_residual(A)
    rad_b = dickson_radical(B).dim_radical
    if (comm_a <= COMMUTATIVE_TOL) != a_commutative or (rad_b == 0) != b_semisimple:
        raise FlagContradiction(
            f"declared A commutative={a_commutative}, B semisimple={b_semisimple}; "
            f"measured commutativity residual {comm_a:.3g}, dim rad(B) = {rad_b}",
            witness={"commutativity_residual": comm_a, "target_radical_dim": rad_b})
    w = invert(T(A.unit))
    Tp = PartialIsometry(A, B, T.domain, lambda a: w * T(a),
                         inverse=None if T.inverse is None else (lambda b: T.inverse(T(A.unit) * b)),
                         codomain=T.codomain, name=f"normalized {T.name}")
    cand, ext = extend_isometry(Tp, seed=seed, tol=tol)
    mult = check_multiplicativity(cand, pairs=pairs, seed=seed + 1, tol=tol)
    comm_b = commutativity_residual(B)
    rad_a = dickson_radical(A).dim_radical
    checks = {
        "extension_multiplicative": (ext.extends and mult.mult_residual <= tol, mult.mult_residual),
        "target_commutative": (comm_b <= COMMUTATIVE_TOL, comm_b),
        "source_semisimple": (rad_a == 0, float(rad_a)),
    }
    ok = all(c[0] for c in checks.values())
    return PipelineReport("ConclusionsHold" if ok else "ConclusionsFail", checks, ext, mult)


# ---------------------------------------------------------------------------
# matrix classification

PHI: dict[str, Callable[[np.ndarray], np.ndarray]] = {f: (lambda M, f=f: apply_form(M, f)) for f in FORMS}


@dataclass
class ClassificationResult:
    form: str                      # one of FORMS or NoFormFits
    U: np.ndarray | None
    scale: np.ndarray
    residual: float
    residuals: dict[str, float]
    condition: float | None = None


def normalize_gauge(U: np.ndarray) -> np.ndarray:
    """Frobenius norm 1 and first non-negligible entry (row-major) positive real."""
    U = U / np.linalg.norm(U)
    flat = U.reshape(-1)
    k = int(np.argmax(np.abs(flat) > 1e-8 * np.max(np.abs(flat))))
    return U * (abs(flat[k]) / flat[k])


def as_matrix_map(T: PartialIsometry) -> Callable[[np.ndarray], np.ndarray]:
    def S(M):
        return element_to_matrix(T(matrix_to_element(T.source, M)))
    return S


def _hypothesis(R_list, M_list, phi):
    n = R_list[0].shape[0]
    eye = np.eye(n)
    # column-major vec: vec(RU) = (I kron R) vec U, vec(U P) = (P^T kron I) vec U
    K = np.vstack([np.kron(eye, R) - np.kron(phi(M).T, eye) for R, M in zip(R_list, M_list)])
    _, s, vh = np.linalg.svd(K, full_matrices=False)
    U = vh[-1].conj().reshape(n, n, order="F")
    return s[-1] / s[0], U


def classify_matrix_isometry(S, n: int, samples: int | None = None, seed: int = 0,
                             tol: float = FORM_TOL) -> ClassificationResult:
    """Decide which of the four forms ``S(E) U phi(M) U^{-1}`` fits ``S``.

    ``S`` maps ``n x n`` arrays to ``n x n`` arrays, or is a
    :class:`PartialIsometry` on ``M_n``.  Each hypothesis is a homogeneous
    Sylvester-type system in ``U`` solved through its smallest singular
    vector; the residual is that singular value over the largest.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    samples = 2 * n * n if samples is None else samples
    if samples < 2 * n * n:
        raise ValueError(f"need at least {2 * n * n} samples")
    if isinstance(S, PartialIsometry):
        S = as_matrix_map(S)
    rng = np.random.default_rng(seed)
    M_list = [(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
              for _ in range(samples)]
    SE = np.asarray(S(np.eye(n, dtype=complex)))
    SE_inv = np.linalg.inv(SE)
    R_list = [SE_inv @ np.asarray(S(M)) for M in M_list]

    results = {f: _hypothesis(R_list, M_list, PHI[f]) for f in FORMS}
    residuals = {f: float(r) for f, (r, _) in results.items()}
    passing = [f for f in FORMS if residuals[f] <= tol]
    if len(passing) > 1:
        raise AmbiguousForm(f"forms {passing} all fit", witness={"residuals": residuals})
    if not passing:
        best = min(residuals, key=residuals.get)
        return ClassificationResult("NoFormFits", None, SE, residuals[best], residuals)
    form = passing[0]
    U = results[form][1]
    cond = float(np.linalg.cond(U))
    if not np.isfinite(cond) or 1.0 / cond < MIN_RCOND:
        raise SingularRecoveredU(f"recovered U has condition {cond:.3g}",
                                 witness={"U": U.reshape(-1), "condition": cond})
    return ClassificationResult(form, normalize_gauge(U), SE, residuals[form], residuals, cond)
