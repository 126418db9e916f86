"""Invertibility, spectrum, exponentials and invertible-group membership.

Everything goes through the left regular representation: in finite dimension
``a`` is invertible iff ``L_a`` is, and ``sigma(a)`` is the eigenvalue set of
``L_a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

from .algebra import Algebra, Element, norm, norm_coords, regular_rep
from .errors import NotInvertible, Overflow, UnknownComponentStructure

SINGULAR_RTOL = 1e-12
INVERSE_TOL = 1e-9
OMEGA_MARGIN = 1e-10


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    spectral_radius: float


@dataclass(frozen=True)
class SubgroupDescriptor:
    """Which open subgroup of the invertible group a domain is.

    ``kind`` is one of ``full_invertible_group``, ``principal_component`` or
    ``custom_predicate``; the last needs ``predicate``.
    """

    kind: str = "full_invertible_group"
    predicate: Callable[[Element], bool] | None = None

    def __post_init__(self):
        if self.kind not in ("full_invertible_group", "principal_component", "custom_predicate"):
            raise ValueError(f"unknown subgroup kind {self.kind!r}")
        if self.kind == "custom_predicate" and self.predicate is None:
            raise ValueError("custom_predicate needs a predicate")

    def contains(self, a: Element) -> bool:
        return in_subgroup(a, self)


FULL_GROUP = SubgroupDescriptor("full_invertible_group")
PRINCIPAL = SubgroupDescriptor("principal_component")


def is_invertible(a: Element) -> bool:
    s = np.linalg.svd(regular_rep(a), compute_uv=False)
    return bool(s[0] > 0 and s[-1] >= SINGULAR_RTOL * s[0])


def invert(a: Element) -> Element:
    L = regular_rep(a)
    s = np.linalg.svd(L, compute_uv=False)
    if s[0] == 0 or s[-1] < SINGULAR_RTOL * s[0]:
        raise NotInvertible(f"smallest singular value {s[-1]:.3g} of L_a", witness={"a": a.coords})
    A = a.algebra
    inv = Element(A, np.linalg.solve(L, A.unit_coords))
    e = A.unit
    scale = max(1.0, norm(a) * norm(inv))
    err = max(norm(a * inv - e), norm(inv * a - e))
    if err > INVERSE_TOL * scale:
        raise NotInvertible(f"inverse residual {err:.3g}", witness={"a": a.coords, "residual": err})
    return inv


def spectrum(a: Element) -> SpectrumResult:
    ev = np.linalg.eigvals(regular_rep(a))
    return SpectrumResult(ev, float(np.max(np.abs(ev))) if ev.size else 0.0)


def spectral_radius(a: Element) -> float:
    return spectrum(a).spectral_radius


def gelfand_radius(a: Element, k_max: int = 128) -> float:
    """``||a^k||^(1/k)`` with ``k = k_max`` reached by repeated squaring."""
    if k_max < 1 or k_max > 1024 or k_max & (k_max - 1):
        raise ValueError("k_max must be a power of two no larger than 1024")

    def attempt(x):
        p = x
        for _ in range(int(math.log2(k_max))):
            p = p * p
            if not np.all(np.isfinite(p.coords)) or norm(p) > 1e300:
                raise Overflow(f"||a^k|| exceeded 1e300 for k <= {k_max}")
        return norm(p) ** (1.0 / k_max)

    s = norm(a)
    if s == 0:
        return 0.0
    try:
        return attempt(a)
    except Overflow:
        return s * attempt(a / s)


def in_subgroup(a: Element, d: SubgroupDescriptor) -> bool:
    if d.kind == "custom_predicate":
        return bool(d.predicate(a))
    if d.kind == "principal_component" and not a.algebra.principal_certificate:
        raise UnknownComponentStructure(
            f"no connectedness certificate for {a.algebra.name}; pass a custom predicate"
        )
    return is_invertible(a)


def check_subgroup_closure(d: SubgroupDescriptor, algebra: Algebra, rng, samples: int = 50,
                           sampler=None) -> list[tuple[Element, Element]]:
    """Return sampled member pairs whose product or inverses leave ``d``."""
    sampler = sampler or principal_sampler(algebra, rng)
    bad = []
    members = [x for x in (next(sampler) for _ in range(2 * samples)) if in_subgroup(x, d)]
    for a, b in zip(members[::2], members[1::2]):
        if not (in_subgroup(a * b, d) and in_subgroup(invert(a), d)):
            bad.append((a, b))
    return bad


def _omega_gap(a: Element, r):
    A = a.algebra
    r = np.atleast_1d(np.asarray(r, dtype=float))
    shifted = a.coords[None, :] - r[:, None] * A.unit_coords[None, :]
    return norm_coords(A, shifted) - r


def omega_gap(a: Element) -> float:
    """``min_r (||a - r e|| - r)`` over a log grid in ``r`` with local refinement."""
    na = norm(a)
    if na == 0:
        return 0.0
    exps = np.arange(-20.0, 20.0 + 1e-9, 0.125)
    rs = na * 2.0 ** exps
    gaps = _omega_gap(a, rs)
    j = int(np.argmin(gaps))
    best = float(gaps[j])
    lo, hi = exps[max(j - 1, 0)], exps[min(j + 1, len(exps) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda s: float(_omega_gap(a, na * 2.0 ** s)[0]),
                              bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        best = min(best, float(res.fun))
    return best


def in_omega(a: Element) -> bool:
    """Is ``||a - r e|| < r`` for some ``r > 0``."""
    return omega_gap(a) < -OMEGA_MARGIN


def exp_element(a: Element) -> Element:
    return Element(a.algebra, expm(regular_rep(a)) @ a.algebra.unit_coords)


def principal_sampler(algebra: Algebra, rng: np.random.Generator, factors: int = 2,
                      scale: float = 0.7):
    """Endless generator of products of exponentials (members of the principal component)."""
    while True:
        x = exp_element(algebra.random_element(rng, scale))
        for _ in range(factors - 1):
            x = x * exp_element(algebra.random_element(rng, scale))
        yield x
