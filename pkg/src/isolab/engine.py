"""Linear extension of isometries between open subgroups of invertible groups.

Given an isometry ``T`` from an open subgroup of ``A^{-1}`` onto one of
``B^{-1}``, the limit ``u0 = lim_{a -> 0} T(a)`` lies in ``rad(B)`` and

    T0 = T - u0,    Tt(a) = T0(a + 2||a|| e) - T0(2||a|| e)

is a real-linear surjective isometry ``A -> B`` with ``T = Tt + u0`` on the
domain.  This module computes ``u0``, assembles ``Tt`` as a real matrix on
realified coordinates, and turns every step of that statement into a measured
residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import Algebra, Element, norm
from .errors import (
    DomainViolation,
    NoLimit,
    NotIsometric,
    NotSymmetric,
    SegmentLeavesDomain,
)
from .radical import dickson_radical, sup_im_numrange
from .spectral import FULL_GROUP, SubgroupDescriptor, in_subgroup, invert

DEFAULT_TOL = 1e-8


# ---------------------------------------------------------------------------
# domains

@dataclass(frozen=True, eq=False)
class BallUnion:
    """Union of open balls; only used for non-subgroup negative examples."""

    centers: tuple[Element, ...]
    radii: tuple[float, ...]

    def contains(self, a: Element) -> bool:
        return any(norm(a - c) < r for c, r in zip(self.centers, self.radii))


Domain = SubgroupDescriptor | BallUnion


def in_domain(a: Element, domain: Domain) -> bool:
    if isinstance(domain, BallUnion):
        return domain.contains(a)
    return in_subgroup(a, domain)


def sample_domain(domain: Domain, algebra: Algebra, rng: np.random.Generator,
                  scale: float = 1.0, max_tries: int = 1000) -> Element:
    if isinstance(domain, BallUnion):
        k = int(rng.integers(len(domain.centers)))
        d = algebra.random_element(rng)
        d = d / norm(d)
        return domain.centers[k] + (0.95 * domain.radii[k] * rng.uniform()) * d
    for _ in range(max_tries):
        a = algebra.random_element(rng, scale)
        if in_domain(a, domain):
            return a
    raise RuntimeError("could not sample a domain point")


# ---------------------------------------------------------------------------
# maps

@dataclass(frozen=True, eq=False)
class PartialIsometry:
    """A map defined on ``domain`` inside ``source`` with values in ``target``."""

    source: Algebra
    target: Algebra
    domain: Domain
    forward: Callable[[Element], Element]
    inverse: Callable[[Element], Element] | None = None
    codomain: Domain = FULL_GROUP
    claims_group_homomorphism: bool = False
    claims_unital: bool = False
    claims_isometry: bool = True
    name: str = ""

    def __call__(self, a: Element) -> Element:
        return self.forward(a)

    @property
    def is_subgroup_domain(self) -> bool:
        return isinstance(self.domain, SubgroupDescriptor)


def check_partial_isometry(T: PartialIsometry, pairs: int = 1000, seed: int = 0) -> dict:
    """Sampled audit of the map's declared properties.

    Returns the worst relative distance defect, the number of images outside
    the codomain, and the worst ``inverse(forward(a)) - a`` defect.
    """
    rng = np.random.default_rng(seed)
    worst, witness = 0.0, None
    range_misses = 0
    inv_defect = 0.0
    for _ in range(pairs):
        a = sample_domain(T.domain, T.source, rng)
        b = sample_domain(T.domain, T.source, rng)
        Ta, Tb = T(a), T(b)
        d = norm(a - b)
        defect = abs(norm(Ta - Tb) - d) / max(1.0, d)
        if defect > worst:
            worst, witness = defect, (a, b)
        if not in_domain(Ta, T.codomain):
            range_misses += 1
        if T.inverse is not None:
            inv_defect = max(inv_defect, norm(T.inverse(Ta) - a) / max(1.0, norm(a)))
    return {"isometry_defect": worst, "witness": witness,
            "range_misses": range_misses, "inverse_defect": inv_defect}


# ---------------------------------------------------------------------------
# realification

def realify(z: np.ndarray) -> np.ndarray:
    return np.concatenate([z.real, z.imag])


def complexify(x: np.ndarray) -> np.ndarray:
    n = x.shape[0] // 2
    return x[:n] + 1j * x[n:]


def multiply_by_i(dim: int) -> np.ndarray:
    eye = np.eye(dim)
    zero = np.zeros((dim, dim))
    return np.block([[zero, -eye], [eye, zero]])


@dataclass(frozen=True, eq=False)
class LinearCandidate:
    """Real-linear map on realified coordinates, plus the translation ``u0``."""

    matrix_real: np.ndarray
    offset: Element
    source: Algebra

    @property
    def target(self) -> Algebra:
        return self.offset.algebra

    def __call__(self, a: Element) -> Element:
        return Element(self.target, complexify(self.matrix_real @ realify(a.coords)))

    def affine(self, a: Element) -> Element:
        return self(a) + self.offset

    def preimage(self, b: Element) -> Element:
        x = np.linalg.solve(self.matrix_real, realify(b.coords))
        return Element(self.source, complexify(x))

    def complex_linearity_residual(self) -> float:
        M = self.matrix_real
        J1, J2 = multiply_by_i(self.source.dim), multiply_by_i(self.target.dim)
        return float(np.linalg.norm(M @ J1 - J2 @ M) / max(1.0, np.linalg.norm(M)))

    def conjugate_linearity_residual(self) -> float:
        M = self.matrix_real
        J1, J2 = multiply_by_i(self.source.dim), multiply_by_i(self.target.dim)
        return float(np.linalg.norm(M @ J1 + J2 @ M) / max(1.0, np.linalg.norm(M)))


@dataclass
class ExtensionReport:
    u0: Element
    u0_in_radical: bool
    u0_radical_distance: float
    additivity_residual: float
    homogeneity_residual: float
    isometry_residual: float
    agreement_residual: float
    surjectivity_probe_residual: float | None   # None: not probed
    verdict: str                                 # ExtendsAsTheorem | FailsExtension
    witness: dict | None = None
    complex_linear: bool = False
    conjugate_linear: bool = False
    scale_residual: float = 0.0
    domain_violation: str | None = None
    tolerance: float = DEFAULT_TOL
    residual_witnesses: dict = field(default_factory=dict)

    @property
    def extends(self) -> bool:
        return self.verdict == "ExtendsAsTheorem"

    def residuals(self) -> dict:
        return {
            "additivity": self.additivity_residual,
            "homogeneity": self.homogeneity_residual,
            "isometry": self.isometry_residual,
            "agreement": self.agreement_residual,
            "surjectivity_probe": self.surjectivity_probe_residual,
            "scale": self.scale_residual,
            "u0_radical_distance": self.u0_radical_distance,
        }


# ---------------------------------------------------------------------------
# u0

def estimate_u0(T: PartialIsometry, k_first: int = 10, k_last: int = 30,
                max_ratio: float = 0.9) -> Element:
    """Limit of ``T(2^-k e)`` as ``k`` grows, with one Richardson step.

    Successive differences must contract by at least ``max_ratio`` until they
    reach rounding level; otherwise :class:`NoLimit` is raised.
    """
    e = T.source.unit
    xs = []
    for k in range(k_first, k_last + 1):
        a = e * 2.0 ** -k
        if not in_domain(a, T.domain):
            raise NoLimit(f"2^-{k} e is outside the declared domain")
        xs.append(T(a))
    diffs = [norm(y - x) for x, y in zip(xs, xs[1:])]
    floor = 1e-13 * max(1.0, max(norm(x) for x in xs))
    for k, (d0, d1) in enumerate(zip(diffs, diffs[1:]), start=k_first):
        if d0 > floor and d1 > max_ratio * d0 + floor:
            raise NoLimit(f"differences do not contract at k={k}: {d0:.3g} -> {d1:.3g}",
                          witness={"k": k, "differences": diffs})
    return xs[-1] * 2.0 - xs[-2]


# ---------------------------------------------------------------------------
# construction

def _formula(T0, A: Algebra, domain: Domain, a: Element, scale: float = 1.0) -> Element:
    """``(T0(s a + 2 s||a|| e) - T0(2 s||a|| e)) / s``."""
    na = norm(a)
    if na == 0:
        return T0.target_zero
    s = scale
    shift = A.unit * (2.0 * s * na)
    p = a * s + shift
    for point in (p, shift):
        if not in_domain(point, domain):
            raise DomainViolation(f"{point!r} is outside the domain",
                                  witness={"a": a.coords, "point": point.coords, "scale": s})
    return (T0(p) - T0(shift)) / s


class _Shifted:
    """``T0 = T - u0`` and its inverse."""

    def __init__(self, T: PartialIsometry, u0: Element):
        self.T, self.u0 = T, u0
        self.target_zero = T.target.zero

    def __call__(self, a):
        return self.T(a) - self.u0

    def inverse(self, b):
        return self.T.inverse(b + self.u0)


def extend_isometry(T: PartialIsometry, samples: int = 200, seed: int = 0,
                    tol: float = DEFAULT_TOL) -> tuple[LinearCandidate, ExtensionReport]:
    """Assemble the real-linear extension from ``2 dim`` basis directions.

    Each column is the defining formula evaluated at a unit-norm basis
    direction; the formula is re-evaluated at norms 1/2 and 2 and the spread
    is reported as ``scale_residual``.  On a non-subgroup domain the points
    may leave the domain; the violation is recorded and the columns are
    instead taken at the largest scale ``2^-m`` that stays inside.
    """
    A, B = T.source, T.target
    u0 = estimate_u0(T)
    T0 = _Shifted(T, u0)
    cols = np.zeros((2 * B.dim, 2 * A.dim))
    scale_res = 0.0
    violation = None
    for j in range(A.dim):
        for part, unit in ((0, 1.0), (1, 1j)):
            v = A.basis(j) * unit
            nv = norm(v)
            d = v / nv
            try:
                col = _formula(T0, A, T.domain, d)
                for s in (0.5, 2.0):
                    other = _formula(T0, A, T.domain, d * s) / s
                    scale_res = max(scale_res, norm(other - col))
            except DomainViolation as exc:
                if T.is_subgroup_domain:
                    raise
                violation = violation or str(exc)
                col = _local_formula(T0, A, T.domain, d)
            cols[:, part * A.dim + j] = realify(col.coords) * nv
    cand = LinearCandidate(cols, u0, A)
    report = verify_linear_isometry(cand, T, samples=samples, seed=seed, tol=tol,
                                    scale_residual=scale_res)
    report.domain_violation = violation
    return cand, report


def _local_formula(T0, A, domain, d):
    for m in range(1, 41):
        try:
            return _formula(T0, A, domain, d, scale=2.0 ** -m)
        except DomainViolation:
            continue
    raise DomainViolation("defining formula leaves the domain at every scale",
                          witness={"a": d.coords})


# ---------------------------------------------------------------------------
# verification

def _domain_triples(T, rng, count, attempts):
    out = []
    for _ in range(attempts):
        if len(out) == count:
            break
        a = sample_domain(T.domain, T.source, rng)
        b = sample_domain(T.domain, T.source, rng)
        if in_domain(a + b, T.domain):
            out.append((a, b))
    return out


def verify_linear_isometry(cand: LinearCandidate, T: PartialIsometry, samples: int = 200,
                           seed: int = 0, tol: float = DEFAULT_TOL,
                           scale_residual: float = 0.0) -> ExtensionReport:
    """Measure every property a linear extension must have, on fresh samples.

    * additivity: ``T0(a+b) - T0(a) - T0(b)`` for domain triples, and the same
      for the defining formula on arbitrary ``a, b`` where it is defined;
    * homogeneity: ``T0(ra) - r T0(a)`` and the formula analogue, real ``r``;
    * isometry: ``| ||cand(a)|| - ||a|| |`` on all of ``A``;
    * agreement: ``cand(a) + u0 - T(a)`` on the domain;
    * surjectivity: ``cand(f) - b`` with ``f = T0^{-1}(b + T0(re)) - re``,
      only when the map carries an inverse and the domain is a subgroup.
    """
    A, B = T.source, T.target
    u0 = cand.offset
    T0 = _Shifted(T, u0)
    rng = np.random.default_rng(seed)
    witnesses = {}

    def track(name, value, **points):
        cur = witnesses.get(name)
        if cur is None or value > cur["discrepancy"]:
            witnesses[name] = {"discrepancy": value,
                               **{k: v.coords for k, v in points.items()}}
        return value

    add = 0.0
    for a, b in _domain_triples(T, rng, samples, 100 * samples):
        add = max(add, track("additivity", norm(T0(a + b) - T0(a) - T0(b)), a=a, b=b))
    hom = scale_residual
    for _ in range(samples):
        a = sample_domain(T.domain, A, rng)
        r = float(rng.uniform(-3.0, 3.0))
        if abs(r) < 1e-3 or not in_domain(a * r, T.domain):
            continue
        hom = max(hom, track("homogeneity", norm(T0(a * r) - T0(a) * r), a=a))
    for _ in range(samples):
        a, b = A.random_element(rng), A.random_element(rng)
        r = float(rng.uniform(-3.0, 3.0))
        try:
            fa = _formula(T0, A, T.domain, a)
            fb = _formula(T0, A, T.domain, b)
            fab = _formula(T0, A, T.domain, a + b)
            fra = _formula(T0, A, T.domain, a * r)
        except DomainViolation:
            continue
        add = max(add, track("additivity", norm(fab - fa - fb), a=a, b=b))
        hom = max(hom, track("homogeneity", norm(fra - fa * r), a=a))
    iso = 0.0
    for _ in range(samples):
        a = A.random_element(rng)
        iso = max(iso, track("isometry", abs(norm(cand(a)) - norm(a)), a=a))
    agree = 0.0
    for _ in range(samples):
        a = sample_domain(T.domain, A, rng)
        agree = max(agree, track("agreement", norm(cand.affine(a) - T(a)), a=a))
    surj = None
    if T.inverse is not None and T.is_subgroup_domain:
        surj = 0.0
        t0e_inv = invert(T0(A.unit))
        for _ in range(samples):
            b = B.random_element(rng)
            r = 2.0 * max(norm(b), norm(t0e_inv * b)) + 1.0
            f = T0.inverse(b + T0(A.unit * r)) - A.unit * r
            surj = max(surj, track("surjectivity_probe", norm(cand(f) - b), b=b))

    rad = dickson_radical(B)
    dist = rad.distance(u0)
    in_rad = dist <= tol
    verdict, witness = "ExtendsAsTheorem", None
    for name, value in (("additivity", add), ("homogeneity", hom), ("isometry", iso),
                        ("agreement", agree), ("surjectivity_probe", surj)):
        if value is not None and value > tol:
            verdict = "FailsExtension"
            witness = {"check": name, **witnesses.get(name, {"discrepancy": value})}
            break
    if verdict == "ExtendsAsTheorem" and not in_rad:
        verdict = "FailsExtension"
        witness = {"check": "u0_in_radical", "u0": u0.coords, "discrepancy": dist}
    return ExtensionReport(
        u0=u0, u0_in_radical=in_rad, u0_radical_distance=dist,
        additivity_residual=add, homogeneity_residual=hom, isometry_residual=iso,
        agreement_residual=agree, surjectivity_probe_residual=surj,
        verdict=verdict, witness=witness,
        complex_linear=cand.complex_linearity_residual() <= 1e-9,
        conjugate_linear=cand.conjugate_linearity_residual() <= 1e-9,
        scale_residual=scale_residual, tolerance=tol, residual_witnesses=witnesses,
    )


def numrange_step_residual(cand: LinearCandidate, T: PartialIsometry, samples: int = 20,
                           seed: int = 0) -> float:
    """Largest ``sup Im W`` over ``+-d`` and ``+-i d`` with ``d = P(a) - a``.

    ``P = cand^{-1} o T0``; the extension argument shows ``W(d) = {0}``, so
    every value should vanish.
    """
    rng = np.random.default_rng(seed)
    T0 = _Shifted(T, cand.offset)
    worst = -math.inf
    for _ in range(samples):
        a = sample_domain(T.domain, T.source, rng)
        d = cand.preimage(T0(a)) - a
        for z in (d, -d, d * 1j, d * -1j):
            worst = max(worst, sup_im_numrange(z))
    return worst


# ---------------------------------------------------------------------------
# midpoints and reflections

def midpoint_check(T: PartialIsometry, f: Element, g: Element, grid: int = 64) -> float:
    """``||T((f+g)/2) - (T(f)+T(g))/2||`` for a segment inside the domain."""
    for r in np.linspace(0.0, 1.0, grid):
        if not in_domain(f * (1.0 - r) + g * r, T.domain):
            raise SegmentLeavesDomain(f"segment leaves the domain at r={r:.4f}",
                                      witness={"r": float(r), "f": f.coords, "g": g.coords})
    return norm(T((f + g) * 0.5) - (T(f) + T(g)) * 0.5)


def _match(points: Sequence[Element], z: Element, tol: float) -> int | None:
    for i, p in enumerate(points):
        if norm(p - z) <= tol:
            return i
    return None


def reflection_fixed_point_check(L: Sequence[Element], c: Element,
                                 T_on_L: Callable[[Element], Element] | Sequence[int],
                                 sym_tol: float = 1e-12, iso_tol: float = 1e-9) -> float:
    """``||T(c) - c||`` for a self-isometry of a set symmetric about ``c``.

    ``T_on_L`` is either a map on elements or a permutation of indices of ``L``.
    """
    L = list(L)
    scale = max(1.0, max(norm(p) for p in L))
    if _match(L, c, sym_tol * scale) is None:
        raise NotSymmetric("centre is not in the set", witness={"c": c.coords})
    for p in L:
        if _match(L, c * 2.0 - p, sym_tol * scale) is None:
            raise NotSymmetric("set is not closed under z -> 2c - z",
                               witness={"point": p.coords, "reflection": (c * 2.0 - p).coords})
    if callable(T_on_L):
        images = [T_on_L(p) for p in L]
        idx = [_match(L, q, iso_tol * scale) for q in images]
    else:
        idx = list(T_on_L)
        images = [L[i] for i in idx]
    if any(i is None for i in idx) or sorted(idx) != list(range(len(L))):
        raise NotIsometric("map is not a bijection of the set")
    for i in range(len(L)):
        for j in range(i + 1, len(L)):
            d0 = norm(L[i] - L[j])
            d1 = norm(images[i] - images[j])
            if abs(d1 - d0) > iso_tol * max(1.0, d0):
                raise NotIsometric(f"distance {d0:.6g} -> {d1:.6g}",
                                   witness={"p": L[i].coords, "q": L[j].coords})
    image_c = T_on_L(c) if callable(T_on_L) else images[_match(L, c, sym_tol * scale)]
    return norm(image_c - c)

