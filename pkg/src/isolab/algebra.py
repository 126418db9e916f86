"""Finite-dimensional unital complex algebras given by structure constants.

An :class:`Algebra` stores ``c[i, j, k]`` with ``e_i e_j = sum_k c[i, j, k] e_k``,
the coordinates of the unit, and a rule for the norm.  Elements are immutable
coordinate vectors bound to one algebra.

Every supported norm is the spectral norm of a linear matrix carrier of the
element (a diagonal matrix for ``sup``), except ``unitization_operator`` which
is ``|alpha| + ||m||`` for ``a = alpha e + m``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from numbers import Number

import numpy as np

from .errors import (
    AlgebraMismatch,
    BadUnit,
    MissingEmbedding,
    NonAssociative,
    NormNotSubmultiplicative,
)

STRUCT_TOL = 1e-12
ANALYTIC_TOL = 1e-9


class NormRule(str, enum.Enum):
    SUP = "sup"
    MATRIX_OPERATOR = "matrix_operator"
    REGULAR_REP_OPERATOR = "regular_rep_operator"
    UNITIZATION_OPERATOR = "unitization_operator"


def _frozen(x, dtype=complex):
    arr = np.array(x, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Algebra:
    """A validated unital algebra.  Build through :func:`validate_algebra`."""

    dim: int
    structure_constants: np.ndarray
    unit_coords: np.ndarray
    norm_rule: NormRule = NormRule.REGULAR_REP_OPERATOR
    embedding: np.ndarray | None = None
    name: str = "custom"
    # True when the invertible group is known to be connected (catalog only).
    principal_certificate: bool = False
    notes: tuple[str, ...] = field(default=())

    def __repr__(self):
        return f"Algebra({self.name!r}, dim={self.dim}, norm={self.norm_rule.value})"

    def element(self, coords) -> "Element":
        return Element(self, coords)

    @property
    def unit(self) -> "Element":
        return Element(self, self.unit_coords)

    @property
    def zero(self) -> "Element":
        return Element(self, np.zeros(self.dim, dtype=complex))

    def basis(self, i: int) -> "Element":
        v = np.zeros(self.dim, dtype=complex)
        v[i] = 1.0
        return Element(self, v)

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> "Element":
        z = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return Element(self, scale * z / np.sqrt(2))

    def is_commutative(self, tol: float = STRUCT_TOL) -> bool:
        return commutativity_residual(self) <= tol

    @property
    def carrier_size(self) -> int:
        if self.norm_rule is NormRule.SUP:
            return self.dim
        if self.norm_rule is NormRule.REGULAR_REP_OPERATOR:
            return self.dim
        return self.embedding.shape[-1]


class Element:
    """Coordinate vector of an algebra element.

    ``a * b`` is the algebra product when both operands are elements and scalar
    multiplication when one is a number.
    """

    __slots__ = ("algebra", "coords")

    def __init__(self, algebra: Algebra, coords):
        coords = _frozen(coords)
        if coords.shape != (algebra.dim,):
            raise ValueError(f"expected {algebra.dim} coordinates, got shape {coords.shape}")
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "coords", coords)

    def __setattr__(self, key, value):
        raise AttributeError("Element is immutable")

    def __repr__(self):
        body = ", ".join(f"{z.real:.6g}{z.imag:+.6g}j" for z in self.coords)
        return f"Element<{self.algebra.name}>({body})"

    def _check(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        if other.algebra is not self.algebra:
            raise AlgebraMismatch(f"{self.algebra.name} vs {other.algebra.name}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Element(self.algebra, self.coords + other.coords)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Element(self.algebra, self.coords - other.coords)

    def __neg__(self):
        return Element(self.algebra, -self.coords)

    def __mul__(self, other):
        if isinstance(other, Number):
            return Element(self.algebra, complex(other) * self.coords)
        if isinstance(other, Element):
            return mul(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return Element(self.algebra, complex(other) * self.coords)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Number):
            return Element(self.algebra, self.coords / complex(other))
        return NotImplemented

    def norm(self) -> float:
        return norm(self)


# ---------------------------------------------------------------------------
# products and representations

def _product_coords(c, x, y):
    return np.einsum("...i,...j,ijk->...k", x, y, c)


def mul(a: Element, b: Element) -> Element:
    if a.algebra is not b.algebra:
        raise AlgebraMismatch(f"{a.algebra.name} vs {b.algebra.name}")
    return Element(a.algebra, _product_coords(a.algebra.structure_constants, a.coords, b.coords))


def regular_rep_coords(algebra: Algebra, coords) -> np.ndarray:
    """Left multiplication matrices ``L[k, j] = sum_i x_i c[i, j, k]``, batched."""
    return np.einsum("...i,ijk->...kj", np.asarray(coords, dtype=complex), algebra.structure_constants)


def regular_rep(a: Element) -> np.ndarray:
    """Matrix of ``x -> a x`` in coordinates."""
    return regular_rep_coords(a.algebra, a.coords)


def embed_coords(algebra: Algebra, coords) -> np.ndarray:
    if algebra.embedding is None:
        raise MissingEmbedding(f"{algebra.name} has no concrete embedding")
    return np.einsum("...i,inm->...nm", np.asarray(coords, dtype=complex), algebra.embedding)


def _spectral_norm(mats):
    if mats.shape[-1] == 1:
        return np.abs(mats[..., 0, 0])
    return np.linalg.norm(mats, ord=2, axis=(-2, -1))


def norm_coords(algebra: Algebra, coords) -> np.ndarray | float:
    """Algebra norm of one coordinate vector or a stack of them."""
    coords = np.asarray(coords, dtype=complex)
    rule = algebra.norm_rule
    if rule is NormRule.SUP:
        return np.max(np.abs(coords), axis=-1)
    if rule is NormRule.MATRIX_OPERATOR:
        return _spectral_norm(embed_coords(algebra, coords))
    if rule is NormRule.REGULAR_REP_OPERATOR:
        return _spectral_norm(regular_rep_coords(algebra, coords))
    scalar = coords[..., 0]
    rest = embed_coords(algebra, coords) - scalar[..., None, None] * algebra.embedding[0]
    return np.abs(scalar) + _spectral_norm(rest)


def norm(a: Element) -> float:
    return float(norm_coords(a.algebra, a.coords))


def carrier_coords(algebra: Algebra, coords) -> np.ndarray:
    """Matrix whose spectral norm is the algebra norm (not defined for unitization)."""
    rule = algebra.norm_rule
    coords = np.asarray(coords, dtype=complex)
    if rule is NormRule.SUP:
        out = np.zeros(coords.shape + (algebra.dim,), dtype=complex)
        idx = np.arange(algebra.dim)
        out[..., idx, idx] = coords
        return out
    if rule is NormRule.MATRIX_OPERATOR:
        return embed_coords(algebra, coords)
    if rule is NormRule.REGULAR_REP_OPERATOR:
        return regular_rep_coords(algebra, coords)
    raise ValueError("unitization norm has no single matrix carrier")


def _excess_from_square(sq):
    # ||y|| - 1 from ||y||^2 - 1 without cancellation
    return sq / (1.0 + np.sqrt(np.maximum(1.0 + sq, 0.0)))


def unit_excess(algebra: Algebra, coords) -> np.ndarray:
    """``||e + x|| - 1`` for a stack of small perturbations ``x``.

    Evaluated as ``(||e+x||^2 - 1) / (||e+x|| + 1)`` with the squared excess
    formed from cross terms, so that ``(||e + x|| - 1) / ||x||`` keeps full
    relative accuracy as ``x -> 0``.  Falls back to direct subtraction when the
    carrier of the unit is not unitary.
    """
    x = np.asarray(coords, dtype=complex)
    rule = algebra.norm_rule
    if rule is NormRule.UNITIZATION_OPERATOR:
        x0 = x[..., 0]
        sq = 2.0 * x0.real + np.abs(x0) ** 2
        rest = embed_coords(algebra, x) - x0[..., None, None] * algebra.embedding[0]
        return _excess_from_square(sq) + _spectral_norm(rest)
    if rule is NormRule.SUP:
        u = algebra.unit_coords
        if np.allclose(np.abs(u), 1.0, atol=1e-14):
            sq = 2.0 * np.real(np.conj(u) * x) + np.abs(x) ** 2
            return _excess_from_square(np.max(sq, axis=-1))
        return norm_coords(algebra, x + u) - 1.0
    E = carrier_coords(algebra, algebra.unit_coords)
    if not np.allclose(E.conj().T @ E, np.eye(E.shape[0]), atol=1e-14):
        return norm_coords(algebra, x + algebra.unit_coords) - 1.0
    X = carrier_coords(algebra, x)
    EhX = np.einsum("nm,...nk->...mk", E.conj(), X)
    D = EhX + np.conj(np.swapaxes(EhX, -1, -2)) + np.einsum("...nm,...nk->...mk", X.conj(), X)
    lam = np.linalg.eigvalsh(D)[..., -1]
    return _excess_from_square(lam)


# ---------------------------------------------------------------------------
# validation

def associativity_residual(c: np.ndarray) -> tuple[float, tuple[int, int, int]]:
    left = np.einsum("ijm,mkl->ijkl", c, c)     # (e_i e_j) e_k
    right = np.einsum("jkm,iml->ijkl", c, c)    # e_i (e_j e_k)
    diff = np.max(np.abs(left - right), axis=-1)
    idx = np.unravel_index(int(np.argmax(diff)), diff.shape)
    return float(diff[idx]), tuple(int(i) for i in idx)


def unit_residual(c: np.ndarray, u: np.ndarray) -> float:
    eye = np.eye(c.shape[0])
    left = np.einsum("i,ijk->jk", u, c)
    right = np.einsum("j,ijk->ik", u, c)
    return float(max(np.max(np.abs(left - eye)), np.max(np.abs(right - eye))))


def commutativity_residual(algebra: Algebra) -> float:
    c = algebra.structure_constants
    return float(np.max(np.abs(c - np.transpose(c, (1, 0, 2)))))


def _ratio_batch(algebra, x, y):
    prod = _product_coords(algebra.structure_constants, x, y)
    denom = norm_coords(algebra, x) * norm_coords(algebra, y)
    return norm_coords(algebra, prod) / denom


def _worst_submultiplicative_pair(algebra, rng, samples, refine, steps=300):
    """Largest sampled ``||ab|| / (||a|| ||b||)``, then batched local ascent.

    The ``refine`` worst pairs each run a (1+1) evolution strategy: a random
    perturbation is kept when it raises the ratio, and the step size grows on
    success and shrinks on failure.  All pairs move in one vectorized batch.
    """
    dim = algebra.dim
    x = rng.standard_normal((samples, dim)) + 1j * rng.standard_normal((samples, dim))
    y = rng.standard_normal((samples, dim)) + 1j * rng.standard_normal((samples, dim))
    ratios = _ratio_batch(algebra, x, y)
    k = int(np.argmax(ratios))
    best = (float(ratios[k]), x[k], y[k])
    if not refine:
        return best
    top = np.argsort(ratios)[::-1][:refine]
    px, py, pr = x[top], y[top], ratios[top]
    sigma = np.full(len(top), 0.3)
    for _ in range(steps):
        nx = norm_coords(algebra, px)[:, None]
        ny = norm_coords(algebra, py)[:, None]
        qx = px / nx + sigma[:, None] * (rng.standard_normal(px.shape) + 1j * rng.standard_normal(px.shape))
        qy = py / ny + sigma[:, None] * (rng.standard_normal(py.shape) + 1j * rng.standard_normal(py.shape))
        qr = _ratio_batch(algebra, qx, qy)
        up = qr > pr
        px, py, pr = np.where(up[:, None], qx, px), np.where(up[:, None], qy, py), np.where(up, qr, pr)
        sigma = np.clip(np.where(up, sigma * 1.5, sigma * 0.9), 1e-6, 1.0)
    k = int(np.argmax(pr))
    if pr[k] > best[0]:
        best = (float(pr[k]), px[k], py[k])
    return best


def validate_algebra(
    dim: int,
    structure_constants,
    unit_coords,
    norm_rule: NormRule | str = NormRule.REGULAR_REP_OPERATOR,
    embedding=None,
    *,
    name: str = "custom",
    principal_certificate: bool = False,
    notes=(),
    seed: int = 0,
    samples: int = 1000,
    refine: int = 32,
    struct_tol: float = STRUCT_TOL,
    analytic_tol: float = ANALYTIC_TOL,
) -> Algebra:
    """Check the algebra axioms and return an immutable :class:`Algebra`.

    Associativity and the unit law are checked exactly on basis triples.
    Submultiplicativity is checked on ``samples`` seeded random pairs, after
    which the ``refine`` worst pairs seed a local ascent of
    ``||ab|| / (||a|| ||b||)``; any value above ``1 + analytic_tol`` raises
    :class:`NormNotSubmultiplicative` with the witness pair.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    c = np.asarray(structure_constants, dtype=complex)
    if c.shape != (dim, dim, dim):
        raise ValueError(f"structure constants must have shape {(dim,) * 3}, got {c.shape}")
    u = np.asarray(unit_coords, dtype=complex)
    if u.shape != (dim,):
        raise ValueError(f"unit must have {dim} coordinates")
    rule = NormRule(norm_rule)
    emb = None
    if embedding is not None:
        emb = np.asarray(embedding, dtype=complex)
        if emb.ndim != 3 or emb.shape[0] != dim or emb.shape[1] != emb.shape[2]:
            raise ValueError("embedding must have shape (dim, n, n)")
    if rule in (NormRule.MATRIX_OPERATOR, NormRule.UNITIZATION_OPERATOR) and emb is None:
        raise MissingEmbedding(f"norm rule {rule.value} needs a concrete embedding")
    if rule is NormRule.UNITIZATION_OPERATOR:
        e0 = np.zeros(dim)
        e0[0] = 1
        if not np.allclose(u, e0) or not np.allclose(emb[0], np.eye(emb.shape[1])):
            raise BadUnit("unitization norm needs the unit as basis element 0 embedded as I")

    res, triple = associativity_residual(c)
    if res > struct_tol:
        raise NonAssociative(
            f"(e{triple[0]} e{triple[1]}) e{triple[2]} != e{triple[0]} (e{triple[1]} e{triple[2]}), "
            f"residual {res:.3g}",
            witness={"triple": list(triple), "residual": res},
        )
    ures = unit_residual(c, u)
    if ures > struct_tol:
        raise BadUnit(f"unit law fails, residual {ures:.3g}", witness={"residual": ures})

    algebra = Algebra(
        dim=dim,
        structure_constants=_frozen(c),
        unit_coords=_frozen(u),
        norm_rule=rule,
        embedding=None if emb is None else _frozen(emb),
        name=name,
        principal_certificate=principal_certificate,
        notes=tuple(notes),
    )
    unit_norm = norm(algebra.unit)
    if abs(unit_norm - 1.0) > analytic_tol:
        raise BadUnit(f"||e|| = {unit_norm!r}, expected 1", witness={"unit_norm": unit_norm})
    rng = np.random.default_rng(seed)
    ratio, a, b = _worst_submultiplicative_pair(algebra, rng, samples, refine)
    if ratio > 1.0 + analytic_tol:
        raise NormNotSubmultiplicative(
            f"||ab|| / (||a|| ||b||) = {ratio:.6f} in {name}",
            witness={"a": a, "b": b, "ratio": ratio},
        )
    return algebra
