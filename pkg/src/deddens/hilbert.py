"""Weighted finite-dimensional Hilbert space primitives.

A :class:`MeasureSpace` is a finite set of atoms with positive masses
``mu_i``; functions on it are complex vectors and the inner product is
``<f, g> = sum_i mu_i f_i conj(g_i)``.  Operators are square matrices acting
on coordinates.  Every metric computation (norms, adjoints, SVD, square
roots, pseudoinverses) is carried out after the similarity
``T -> D^{1/2} T D^{-1/2}`` with ``D = diag(mu)``, which turns the weighted
geometry into the standard one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .errors import ConsistencyFailure, DimensionMismatch, NotPositive

__all__ = [
    "MeasureSpace",
    "Operator",
    "ToleranceConfig",
    "MajorizationResult",
    "DouglasResult",
    "DEFAULT_TOL",
    "inner",
    "vnorm",
    "adjoint",
    "operator_norm",
    "spectral_radius",
    "hermitian_sqrt",
    "pinv",
    "kernel_basis",
    "numerical_rank",
    "majorizes",
    "douglas_equivalences",
    "rank_one",
    "identity",
    "zero",
    "to_ortho",
    "from_ortho",
]


@dataclass(frozen=True)
class ToleranceConfig:
    rank_tol: float = 1e-10
    residual_tol: float = 1e-9
    growth_slope_tol: float = 0.01
    series_term_tol: float = 1e-14
    max_power: int = 40
    max_index: int = 20

    def __post_init__(self):
        for name in ("rank_tol", "residual_tol", "growth_slope_tol", "series_term_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.max_power < 1 or self.max_index < 1:
            raise ValueError("max_power and max_index must be >= 1")

    def as_dict(self):
        return {
            "rank_tol": self.rank_tol,
            "residual_tol": self.residual_tol,
            "growth_slope_tol": self.growth_slope_tol,
            "series_term_tol": self.series_term_tol,
            "max_power": self.max_power,
            "max_index": self.max_index,
        }


DEFAULT_TOL = ToleranceConfig()


def _frozen(a, dtype):
    # C order: BLAS results must not depend on the caller's memory layout
    a = np.array(a, dtype=dtype, copy=True, order="C")
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class MeasureSpace:
    """Finite atomic measure space; ``weights`` are the atom masses."""

    weights: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("every atom mass must be finite and > 0")
        object.__setattr__(self, "weights", _frozen(w, float))
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != w.size:
                raise ValueError("labels must match the number of atoms")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def uniform(cls, n):
        return cls(np.ones(n))

    @property
    def dim(self):
        return self.weights.size

    @property
    def sqrt_weights(self):
        return np.sqrt(self.weights)

    def __eq__(self, other):
        if not isinstance(other, MeasureSpace):
            return NotImplemented
        return self is other or np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())

    def vector(self, f):
        """Coerce ``f`` to a complex vector on this space."""
        v = np.asarray(f, dtype=complex)
        if v.shape != (self.dim,):
            raise DimensionMismatch(f"expected a vector of length {self.dim}, got shape {v.shape}")
        return v


@dataclass(frozen=True, eq=False)
class Operator:
    """Bounded operator on L^2 of a finite measure space, stored as a matrix."""

    matrix: np.ndarray
    space: MeasureSpace = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.space.dim
        if m.shape != (n, n):
            raise DimensionMismatch(f"operator must be {n}x{n}, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator entries must be finite")
        object.__setattr__(self, "matrix", _frozen(m, complex))

    @property
    def dim(self):
        return self.space.dim

    def _check(self, other):
        if self.space != other.space:
            raise DimensionMismatch("operators live on different measure spaces")

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.matrix @ other.matrix, self.space)
        return self.matrix @ self.space.vector(other)

    def __add__(self, other):
        self._check(other)
        return Operator(self.matrix + other.matrix, self.space)

    def __sub__(self, other):
        self._check(other)
        return Operator(self.matrix - other.matrix, self.space)

    def __neg__(self):
        return Operator(-self.matrix, self.space)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return Operator(c * self.matrix, self.space)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return Operator(self.matrix / c, self.space)

    def power(self, n):
        return Operator(np.linalg.matrix_power(self.matrix, n), self.space)

    @property
    def H(self):
        return adjoint(self)


@dataclass(frozen=True)
class MajorizationResult:
    holds: bool
    constant: float
    violating_direction: np.ndarray | None = None
    kernel_residual: float = 0.0


@dataclass(frozen=True)
class DouglasResult:
    range_inclusion: bool
    adjoint_majorization: bool
    factorization: bool
    factor: Operator | None
    factor_residual: float

    @property
    def agree(self):
        return self.range_inclusion == self.adjoint_majorization == self.factorization


def identity(space):
    return Operator(np.eye(space.dim), space)


def zero(space):
    return Operator(np.zeros((space.dim, space.dim)), space)


def to_ortho(T):
    """Matrix of ``T`` in the orthonormal coordinates ``D^{1/2} f``."""
    s = T.space.sqrt_weights
    return s[:, None] * T.matrix / s[None, :]


def from_ortho(m, space):
    s = space.sqrt_weights
    return Operator(m * s[None, :] / s[:, None], space)


def _same_space(*objs):
    first = objs[0].space
    for o in objs[1:]:
        if o.space != first:
            raise DimensionMismatch("operators live on different measure spaces")


def inner(space, f, g):
    f = space.vector(f)
    g = space.vector(g)
    return complex(np.sum(space.weights * f * np.conj(g)))


def vnorm(space, f):
    f = space.vector(f)
    return float(np.sqrt(np.sum(space.weights * np.abs(f) ** 2)))


def adjoint(T):
    """Weighted adjoint ``D^{-1} T^H D``."""
    w = T.space.weights
    return Operator(T.matrix.conj().T * w[None, :] / w[:, None], T.space)


def operator_norm(T):
    m = to_ortho(T)
    if not m.any():
        return 0.0
    return float(np.linalg.norm(m, 2))


def spectral_radius(T, tol=DEFAULT_TOL):
    """Spectral radius from the Gelfand limit ``||T^(2^k)||^(1/2^k)``.

    Powers are rescaled after every squaring and their logarithmic norms
    accumulated, so large exponents neither overflow nor underflow.  Iteration
    stops when two successive estimates agree to ``tol.residual_tol``
    (relative) twice in a row, or after 64 squarings.
    """
    est, _ = _accel.gelfand_radius(to_ortho(T), tol.residual_tol, 64)
    return est


def hermitian_sqrt(P, tol=DEFAULT_TOL):
    """Positive square root of a weighted-positive operator."""
    h = to_ortho(P)
    scale = max(1.0, float(np.linalg.norm(h, 2)) if h.any() else 0.0)
    if np.linalg.norm(h - h.conj().T, 2) > tol.residual_tol * scale:
        raise NotPositive("operator is not self-adjoint in the weighted geometry")
    h = 0.5 * (h + h.conj().T)
    evals, vecs = np.linalg.eigh(h)
    if evals.size and evals[0] < -tol.rank_tol * scale:
        raise NotPositive(f"smallest eigenvalue {evals[0]:.3e} is negative")
    root = (vecs * np.sqrt(np.clip(evals, 0.0, None))) @ vecs.conj().T
    return from_ortho(root, P.space)


def pinv(T, tol=DEFAULT_TOL):
    """Moore-Penrose inverse in the weighted geometry."""
    m = to_ortho(T)
    if not m.any():
        return zero(T.space)
    return from_ortho(np.linalg.pinv(m, rcond=tol.rank_tol), T.space)


def _ortho_kernel(m, rank_tol):
    """Orthonormal null-space columns of ``m`` (standard geometry)."""
    n = m.shape[1]
    if not m.any():
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(m)
    r = int(np.sum(s > rank_tol * s[0]))
    return vh[r:].conj().T


def numerical_rank(T, tol=DEFAULT_TOL):
    m = to_ortho(T)
    if not m.any():
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > tol.rank_tol * s[0]))


def kernel_basis(T, tol=DEFAULT_TOL):
    """Weighted-orthonormal basis of the numerical null space of ``T``."""
    k = _ortho_kernel(to_ortho(T), tol.rank_tol)
    s = T.space.sqrt_weights
    return [k[:, j] / s for j in range(k.shape[1])]


def majorizes(T, S, tol=DEFAULT_TOL):
    """Decide whether ``||Sx|| <= M ||Tx||`` for some ``M`` and all ``x``.

    In finite dimension this is kernel inclusion ``ker T ⊆ ker S``.  When it
    holds, the least constant is ``||S T^+||``; when it fails, the returned
    direction is a unit vector of ``ker T`` maximizing ``||Sx||``.
    """
    _same_space(T, S)
    t = to_ortho(T)
    s = to_ortho(S)
    s_norm = float(np.linalg.norm(s, 2)) if s.any() else 0.0
    k = _ortho_kernel(t, tol.rank_tol)
    resid = 0.0
    if k.shape[1] and s_norm > 0.0:
        sk = s @ k
        _, sv, vh = np.linalg.svd(sk)
        resid = float(sv[0])
        if resid > tol.residual_tol * s_norm:
            x = (k @ vh[0].conj()) / T.space.sqrt_weights
            return MajorizationResult(False, np.inf, x, resid / s_norm)
    if s_norm == 0.0:
        return MajorizationResult(True, 0.0, None, 0.0)
    tp = np.linalg.pinv(t, rcond=tol.rank_tol) if t.any() else np.zeros_like(t)
    const = float(np.linalg.norm(s @ tp, 2))
    return MajorizationResult(True, const, None, resid / s_norm)


def douglas_equivalences(T, S, tol=DEFAULT_TOL, strict=True):
    """Evaluate the three Douglas conditions independently.

    1. ``R(S) ⊆ R(T)`` by comparing ``rank [T | S]`` with ``rank T``
       (each block scaled to unit norm, cutoff ``rank_tol``);
    2. ``T*`` majorizes ``S*``;
    3. ``S = T U`` solvable: least-squares ``U = T^+ S`` with residual at
       most ``residual_tol * ||S||``.

    With ``strict`` a disagreement raises :class:`ConsistencyFailure`.
    """
    _same_space(T, S)
    t = to_ortho(T)
    s = to_ortho(S)
    t_norm = float(np.linalg.norm(t, 2)) if t.any() else 0.0
    s_norm = float(np.linalg.norm(s, 2)) if s.any() else 0.0

    if s_norm == 0.0:
        range_incl = True
    elif t_norm == 0.0:
        range_incl = False
    else:
        tn = t / t_norm
        stacked = np.hstack([tn, s / s_norm])
        sv_t = np.linalg.svd(tn, compute_uv=False)
        sv_ts = np.linalg.svd(stacked, compute_uv=False)
        range_incl = int(np.sum(sv_ts > tol.rank_tol * sv_ts[0])) == int(
            np.sum(sv_t > tol.rank_tol * sv_t[0])
        )

    adj_major = majorizes(adjoint(T), adjoint(S), tol).holds

    u = pinv(T, tol)
    factor = u @ S
    resid = float(np.linalg.norm(t @ to_ortho(factor) - s, 2))
    rel = resid / s_norm if s_norm > 0 else resid
    factorizes = rel <= tol.residual_tol

    result = DouglasResult(range_incl, adj_major, factorizes, factor if factorizes else None, rel)
    if strict and not result.agree:
        raise ConsistencyFailure(
            "douglas",
            {
                "range_inclusion": range_incl,
                "adjoint_majorization": adj_major,
                "factorization": factorizes,
            },
            f"factor residual {rel:.3e}",
        )
    return result


def rank_one(space, x, y):
    """The operator ``h -> <h, y> x``."""
    x = space.vector(x)
    y = space.vector(y)
    return Operator(np.outer(x, np.conj(y) * space.weights), space)
