"""Conditional expectation on partitions and weighted conditional type operators.

The sub-sigma-algebra is generated by a partition of the atoms; conditional
expectation replaces a function by its mass-weighted mean on each block.  A
weighted conditional type (WCT) operator is ``f -> w E(u f)``.

Every classifier here answers its question twice, once from the raw matrices
and once from the closed-form criterion in terms of ``E|u|^2``, ``E|w|^2``
and ``E(uw)``.  When the two routes disagree a
:class:`~deddens.errors.ConsistencyFailure` is raised instead of picking one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import ConsistencyFailure, DimensionMismatch, NotMeasurable
from .hilbert import (
    DEFAULT_TOL,
    MeasureSpace,
    Operator,
    adjoint,
    identity,
    kernel_basis,
    operator_norm,
    pinv,
    rank_one,
    vnorm,
)

__all__ = [
    "Partition",
    "WctOperator",
    "BlockDecomposition",
    "cond_exp",
    "conditional_mean",
    "mult_op",
    "is_measurable",
    "wct",
    "wct_norm",
    "support",
    "quasinormal_test",
    "quasi_isometry_test",
    "quasi_isometry_residuals",
    "wct_pinv",
    "pinv_equals_adjoint",
    "mg_annihilation_test",
    "partial_isometry_test",
    "block_decomposition",
    "power_identity_check",
    "power_identity_residual",
    "composition_residuals",
    "conjugate_weight",
    "cond_exp_residuals",
]

_TINY = 1e-300


@dataclass(frozen=True, eq=False)
class Partition:
    """Disjoint nonempty blocks of 0-based atom indices covering the space."""

    blocks: tuple
    space: MeasureSpace

    def __post_init__(self):
        n = self.space.dim
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        seen = np.zeros(n, dtype=bool)
        labels = np.empty(n, dtype=np.int64)
        for k, b in enumerate(blocks):
            if not b:
                raise ValueError(f"block {k} is empty")
            for i in b:
                if not 0 <= i < n:
                    raise ValueError(f"atom index {i} out of range 0..{n - 1}")
                if seen[i]:
                    raise ValueError(f"atom {i} appears in more than one block")
                seen[i] = True
                labels[i] = k
        if not seen.all():
            missing = np.flatnonzero(~seen).tolist()
            raise ValueError(f"atoms {missing} are not covered by any block")
        labels.flags.writeable = False
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_labels(cls, space, labels):
        labels = np.asarray(labels, dtype=int)
        ids = sorted(set(labels.tolist()))
        return cls(tuple(tuple(np.flatnonzero(labels == k).tolist()) for k in ids), space)

    @classmethod
    def trivial(cls, space):
        return cls((tuple(range(space.dim)),), space)

    @classmethod
    def singletons(cls, space):
        return cls(tuple((i,) for i in range(space.dim)), space)

    @property
    def nblocks(self):
        return len(self.blocks)

    def block_masses(self):
        return np.bincount(self.labels, weights=self.space.weights, minlength=self.nblocks)

    def indicator(self, k):
        chi = np.zeros(self.space.dim)
        chi[list(self.blocks[k])] = 1.0
        return chi


def conditional_mean(partition, f):
    """``E(f)``: the mass-weighted block mean, returned as a full vector."""
    f = partition.space.vector(f)
    return _accel.block_mean(f, partition.labels, partition.space.weights, partition.nblocks)


def cond_exp(space, partition):
    if partition.space != space:
        raise DimensionMismatch("partition belongs to a different space")
    same = partition.labels[:, None] == partition.labels[None, :]
    mass = partition.block_masses()[partition.labels]
    return Operator(np.where(same, space.weights[None, :] / mass[:, None], 0.0), space)


def cond_exp_residuals(partition, f, g):
    """Relative residuals of the conditional expectation laws for ``f`` and ``g``.

    ``g`` is first averaged so that it is block-constant for the module law.
    Positivity and Hölder report the size of any violation (0 when they hold).
    """
    space = partition.space
    mu = space.weights
    f = space.vector(f)
    g = space.vector(g)
    E = cond_exp(space, partition)
    ef = conditional_mean(partition, f)
    fscale = max(float(np.max(np.abs(f))), _TINY)

    diff = mu * (ef - f)
    block_gap = max(abs(np.sum(diff[list(b)])) for b in partition.blocks)
    averaging = block_gap / max(float(np.sum(mu * np.abs(f))), _TINY)

    gb = conditional_mean(partition, g)
    lhs = conditional_mean(partition, f * gb)
    module = float(np.max(np.abs(lhs - ef * gb))) / max(fscale * float(np.max(np.abs(gb))), _TINY)

    ea = conditional_mean(partition, np.abs(f))
    positivity = max(0.0, -float(np.min(ea.real))) + float(np.max(np.abs(ea.imag)))
    positivity /= fscale
    strict = 0.0
    for b in partition.blocks:
        b = list(b)
        if np.max(np.abs(f[b])) > 0 and ea[b[0]].real <= 0:
            strict = 1.0

    idem = operator_norm(E @ E - E)
    selfadj = operator_norm(E - adjoint(E))

    efg = np.abs(conditional_mean(partition, f * g)) ** 2
    bound = conditional_mean(partition, np.abs(f) ** 2).real * conditional_mean(partition, np.abs(g) ** 2).real
    holder = max(0.0, float(np.max(efg - bound))) / max(float(np.max(bound)), _TINY)

    return {
        "averaging": float(averaging),
        "module": module,
        "positivity": positivity + strict,
        "idempotent": idem,
        "selfadjoint": selfadj,
        "holder": holder,
    }


def mult_op(space, u):
    return Operator(np.diag(space.vector(u)), space)


def is_measurable(partition, g, tol=DEFAULT_TOL):
    g = partition.space.vector(g)
    scale = max(float(np.max(np.abs(g))), _TINY)
    return bool(np.max(np.abs(g - conditional_mean(partition, g))) <= tol.residual_tol * scale)


def support(f, tol=DEFAULT_TOL):
    """Indices where ``|f_i|`` exceeds ``rank_tol`` times ``max |f|``."""
    a = np.abs(np.asarray(f))
    top = float(a.max()) if a.size else 0.0
    if top == 0.0:
        return ()
    return tuple(np.flatnonzero(a > tol.rank_tol * top).tolist())


@dataclass(frozen=True, eq=False)
class WctOperator:
    u: np.ndarray
    w: np.ndarray
    partition: Partition
    matrix: Operator
    Eu2: np.ndarray
    Ew2: np.ndarray
    Euw: np.ndarray
    S: tuple
    G: tuple
    S0: tuple
    G0: tuple
    F: tuple
    SG: tuple

    @property
    def space(self):
        return self.partition.space

    def chi(self, idx):
        c = np.zeros(self.space.dim)
        c[list(idx)] = 1.0
        return c


def _ro(a):
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


def wct(space, partition, u, w, tol=DEFAULT_TOL):
    """Build ``M_w E M_u`` with its derived conditional data and supports."""
    if partition.space != space:
        raise DimensionMismatch("partition belongs to a different space")
    u = space.vector(u)
    w = space.vector(w)
    E = cond_exp(space, partition).matrix
    matrix = Operator(w[:, None] * E * u[None, :], space)
    eu2 = conditional_mean(partition, np.abs(u) ** 2).real
    ew2 = conditional_mean(partition, np.abs(w) ** 2).real
    euw = conditional_mean(partition, u * w)
    S = support(eu2, tol)
    G = support(ew2, tol)
    SG = tuple(sorted(set(S) & set(G)))
    F = support(euw, tol)
    if not set(F) <= set(SG):
        raise ConsistencyFailure("conditional_holder", {"F": F, "S∩G": SG})
    return WctOperator(
        u=_ro(u),
        w=_ro(w),
        partition=partition,
        matrix=matrix,
        Eu2=_ro(eu2),
        Ew2=_ro(ew2),
        Euw=_ro(euw),
        S=S,
        G=G,
        S0=support(conditional_mean(partition, u), tol),
        G0=support(w, tol),
        F=F,
        SG=SG,
    )


def wct_norm(W, tol=DEFAULT_TOL, check=True):
    """``max_i sqrt(E|u|^2 E|w|^2)``, cross-checked against the SVD norm."""
    closed = float(np.sqrt(np.max(W.Eu2 * W.Ew2)))
    if check:
        direct = operator_norm(W.matrix)
        if abs(direct - closed) > tol.residual_tol * max(1.0, closed):
            raise ConsistencyFailure("wct_norm", {"closed_form": closed, "svd": direct})
    return closed


def _rel(a, scale):
    return float(a) / max(float(scale), _TINY)


def _opnorm(m):
    return float(np.linalg.norm(m, 2)) if m.any() else 0.0


def _onorm(T):
    return operator_norm(T)


@dataclass(frozen=True)
class QuasinormalResult:
    is_quasinormal: bool
    v: np.ndarray | None
    matrix_residual: float
    closed_residual: float


def quasinormal_test(W, tol=DEFAULT_TOL):
    """Decide ``T T* T = T* T T`` by matrices and by ``w = v conj(u)`` on S∩G.

    ``v = E(uw) / E|u|^2`` on S∩G and 0 elsewhere.  Returns the verdict and
    ``v`` when quasinormal.
    """
    T = W.matrix
    Ts = adjoint(T)
    t = _onorm(T)
    mres = _rel(_onorm(T @ Ts @ T - Ts @ T @ T), t**3) if t > 0 else 0.0
    by_matrix = mres <= tol.residual_tol

    sg = W.chi(W.SG).astype(bool)
    v = np.zeros(W.space.dim, dtype=complex)
    v[sg] = W.Euw[sg] / W.Eu2[sg]
    on_s = W.chi(W.S).astype(bool)
    gap = np.abs(W.w - v * np.conj(W.u))[on_s]
    wscale = float(np.max(np.abs(W.w[on_s]))) if on_s.any() else 0.0
    cres = _rel(gap.max(), wscale) if gap.size and wscale > 0 else 0.0
    by_formula = cres <= tol.residual_tol

    if by_matrix != by_formula:
        raise ConsistencyFailure(
            "quasinormal", {"matrix": by_matrix, "closed_form": by_formula},
            f"matrix residual {mres:.3e}, closed-form residual {cres:.3e}",
        )
    return QuasinormalResult(by_matrix, _ro(v) if by_matrix else None, mres, cres)


def quasi_isometry_residuals(W, n):
    """Relative residuals of ``T*^n T^n = T*^(n+1) T^(n+1)`` and of ``|E(uw)| = 1`` on F."""
    T = W.matrix.matrix
    Ts = adjoint(W.matrix).matrix
    pn = np.linalg.matrix_power(T, n)
    psn = np.linalg.matrix_power(Ts, n)
    a = psn @ pn
    b = Ts @ a @ T
    s = W.space.sqrt_weights
    o = lambda m: s[:, None] * m / s[None, :]  # noqa: E731
    scale = max(_opnorm(o(a)), _opnorm(o(b)))
    mres = _rel(_opnorm(o(a - b)), scale) if scale > 0 else 0.0
    f = list(W.F)
    cres = float(np.max(np.abs(np.abs(W.Euw[f]) - 1.0))) if f else 0.0
    return mres, cres


def quasi_isometry_test(W, n=1, tol=DEFAULT_TOL):
    """Decide whether ``T`` is an ``n``-quasi-isometry.

    Route one compares ``T*^n T^n`` with ``T*^(n+1) T^(n+1)``; route two is
    ``|E(uw)| = 1`` on ``F = supp E(uw)``.  For ``n = 1`` the two routes can
    legitimately part ways when ``E(uw)`` vanishes on a block of S∩G; that
    case surfaces as a ConsistencyFailure.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    mres, cres = quasi_isometry_residuals(W, n)
    by_matrix = mres <= tol.residual_tol
    by_formula = cres <= tol.residual_tol
    if by_matrix != by_formula:
        raise ConsistencyFailure(
            "quasi_isometry", {"matrix": by_matrix, "closed_form": by_formula, "n": n},
            f"matrix residual {mres:.3e}, max ||E(uw)|-1| on F {cres:.3e}",
        )
    return by_matrix


def wct_pinv(W, tol=DEFAULT_TOL, check=True):
    """Closed-form Moore-Penrose inverse ``M_{chi_SG / (E|u|^2 E|w|^2)} T*``."""
    scale = np.zeros(W.space.dim)
    sg = list(W.SG)
    scale[sg] = 1.0 / (W.Eu2[sg] * W.Ew2[sg])
    closed = Operator(scale[:, None] * adjoint(W.matrix).matrix, W.space)
    if check:
        svd = pinv(W.matrix, tol)
        diff = _onorm(closed - svd)
        if diff > tol.residual_tol * max(1.0, _onorm(svd)):
            raise ConsistencyFailure(
                "moore_penrose", {"closed_form": "T_dagger", "svd": "pinv"},
                f"||closed - svd|| = {diff:.3e}",
            )
    return closed


def pinv_equals_adjoint(W, tol=DEFAULT_TOL):
    """``T^+ = T*`` decided directly and via ``E|u|^2 E|w|^2 = chi_SG``."""
    Tp = wct_pinv(W, tol)
    Ts = adjoint(W.matrix)
    direct = _onorm(Tp - Ts) <= tol.residual_tol * max(1.0, _onorm(Ts))
    prod = (W.Eu2 * W.Ew2)
    closed = bool(np.max(np.abs(prod - W.chi(W.SG))) <= tol.residual_tol * max(1.0, prod.max()))
    if direct != closed:
        raise ConsistencyFailure("pinv_equals_adjoint", {"matrix": direct, "closed_form": closed})
    return direct


def mg_annihilation_test(g, W, tol=DEFAULT_TOL):
    """Whether ``M_g T = 0`` for block-constant ``g``.

    Three routes: the matrix norm of ``M_g T``; ``g = 0`` on S∩G; and the norm
    identity ``||M_g T||^2 = max |g|^2 E|w|^2 E|u|^2``.
    """
    g = W.space.vector(g)
    if not is_measurable(W.partition, g, tol):
        raise NotMeasurable("g is not constant on the partition blocks")
    MgT = mult_op(W.space, g) @ W.matrix
    norm_sq = _onorm(MgT) ** 2
    closed_sq = float(np.max(np.abs(g) ** 2 * W.Ew2 * W.Eu2))
    scale = max(1.0, float(np.max(np.abs(g)) ** 2 * np.max(W.Eu2 * W.Ew2)))
    if abs(norm_sq - closed_sq) > tol.residual_tol * scale:
        raise ConsistencyFailure("mg_norm_identity", {"matrix": norm_sq, "closed_form": closed_sq})
    gscale = max(float(np.max(np.abs(g))), _TINY)
    by_matrix = np.sqrt(norm_sq) <= tol.residual_tol * np.sqrt(scale)
    sg = list(W.SG)
    by_support = bool(np.all(np.abs(g[sg]) <= tol.residual_tol * gscale)) if sg else True
    if by_matrix != by_support:
        raise ConsistencyFailure("mg_annihilation", {"matrix": by_matrix, "support": by_support})
    return bool(by_matrix)


def partial_isometry_test(W, tol=DEFAULT_TOL):
    T = W.matrix
    t = _onorm(T)
    by_matrix = _onorm(T @ adjoint(T) @ T - T) <= tol.residual_tol * max(1.0, t**3)
    sg = list(W.SG)
    prod = W.Eu2 * W.Ew2
    by_formula = bool(np.all(np.abs(prod[sg] - 1.0) <= tol.residual_tol)) if sg else True
    by_pinv = pinv_equals_adjoint(W, tol)
    if not by_matrix == by_formula == by_pinv:
        raise ConsistencyFailure(
            "partial_isometry",
            {"matrix": by_matrix, "closed_form": by_formula, "pinv_is_adjoint": by_pinv},
        )
    return by_matrix


def conjugate_weight(W, tol=DEFAULT_TOL):
    """Block-constant ``a`` with ``w = a conj(u)``, or ``None`` if there is none."""
    u, w = W.u, W.w
    scale = max(float(np.max(np.abs(w))), _TINY)
    a = np.zeros(W.space.dim, dtype=complex)
    for k, block in enumerate(W.partition.blocks):
        b = list(block)
        ub = np.conj(u[b])
        denom = float(np.sum(np.abs(ub) ** 2))
        if denom == 0.0:
            if np.max(np.abs(w[b])) > tol.residual_tol * scale:
                return None
            continue
        ak = np.sum(w[b] * np.conj(ub)) / denom
        if np.max(np.abs(w[b] - ak * ub)) > tol.residual_tol * scale:
            return None
        a[b] = ak
    return a


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    P: Operator
    Pperp: Operator
    h1_basis: tuple
    h1_blocks: tuple

    def compress(self, S):
        """Matrix of ``P S P`` in the orthonormal basis of H1."""
        sp = S.space
        B = np.column_stack(self.h1_basis) if self.h1_basis else np.zeros((sp.dim, 0))
        return (B.conj().T * sp.weights[None, :]) @ S.matrix @ B


def block_decomposition(W, tol=DEFAULT_TOL):
    """Projection onto ``H1 = span{conj(u) chi_B}`` and its complement ``N(E M_u)``."""
    space = W.space
    cand = []
    for k in range(W.partition.nblocks):
        v = np.conj(W.u) * W.partition.indicator(k)
        cand.append((k, v, vnorm(space, v)))
    top = max((c[2] for c in cand), default=0.0)
    basis, blocks = [], []
    for k, v, nv in cand:
        if nv > tol.rank_tol * top and nv > 0:
            basis.append(_ro(v / nv))
            blocks.append(k)
    P = Operator(np.zeros((space.dim, space.dim)), space)
    for e in basis:
        P = P + rank_one(space, e, e)
    Pperp = identity(space) - P

    EMu = cond_exp(space, W.partition) @ mult_op(space, W.u)
    ker = kernel_basis(EMu, tol)
    leak = max((vnorm(space, P @ k) for k in ker), default=0.0)
    if len(ker) != space.dim - len(basis) or leak > tol.residual_tol:
        raise ConsistencyFailure(
            "block_decomposition",
            {"dim_kernel": len(ker), "dim_H2": space.dim - len(basis)},
            f"kernel leak into H1 {leak:.3e}",
        )

    a = conjugate_weight(W, tol)
    if a is not None and basis:
        T = W.matrix
        phi = a * W.Eu2
        Tn = identity(space)
        Mn = identity(space)
        for n in range(1, 4):
            Tn = Tn @ T
            Mn = Mn @ mult_op(space, phi)
            lhs = Tn @ P
            res = _onorm(lhs - Mn @ P)
            if res > tol.residual_tol * max(1.0, _onorm(lhs)):
                raise ConsistencyFailure("T^n P = M_(aE|u|^2)^n P", {"n": n}, f"residual {res:.3e}")
    return BlockDecomposition(P, Pperp, tuple(basis), tuple(blocks))


def power_identity_residual(W, n):
    """Relative residual of ``T^n = M_{E(uw)^(n-1)} T``."""
    T = W.matrix
    lhs = T.power(n)
    rhs = Operator((W.Euw ** (n - 1))[:, None] * T.matrix, W.space)
    t = _onorm(T)
    return _rel(_onorm(lhs - rhs), max(1.0, t) ** n)


def power_identity_check(W, n, tol=DEFAULT_TOL):
    if n < 1:
        raise ValueError("n must be >= 1")
    return power_identity_residual(W, n) <= tol.residual_tol


def composition_residuals(W, max_n=5):
    """Relative residuals of the standard WCT composition identities."""
    sp = W.space
    u, w = W.u, W.w
    E = cond_exp(sp, W.partition)
    M = lambda f: mult_op(sp, f)  # noqa: E731
    T = W.matrix
    Ts = adjoint(T)
    t = max(1.0, _onorm(T))
    out = {
        "adjoint": _onorm(Ts - M(np.conj(u)) @ E @ M(np.conj(w))) / t,
        "TsT": _onorm(Ts @ T - M(np.conj(u) * W.Ew2) @ E @ M(u)) / t**2,
        "TTs": _onorm(T @ Ts - M(w * W.Eu2) @ E @ M(np.conj(w))) / t**2,
        "TTsT": _onorm(T @ Ts @ T - M(W.Eu2 * W.Ew2) @ T) / t**3,
        "TsTT": _onorm(Ts @ T @ T - M(W.Euw * W.Ew2) @ M(np.conj(u)) @ E @ M(u)) / t**3,
    }
    for n in range(1, max_n + 1):
        out[f"power_{n}"] = power_identity_residual(W, n)
    return out
