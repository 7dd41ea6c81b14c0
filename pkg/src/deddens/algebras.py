"""Deddens algebras D_T and spectral radius algebras B_T.

Two kinds of membership test live here.

*Empirical oracles* (:func:`deddens_empirical`, :func:`bt_empirical`) follow
the definitions: they compute the least constant in ``||T^n S x|| <= M
||T^n x||`` for ``n = 1..max_power``, or ``||R_m S R_m^{-1}||`` for ``m =
1..max_index``, and classify the resulting profile by its logarithmic slope.

*Closed forms* (everything else) are the characterizations for rank-one,
similar-to-rank-one, quasi-isometric, multiplication and WCT operators.  With
``check=True`` each closed form is compared with the matching empirical
oracle and a disagreement on a conclusive run raises ConsistencyFailure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .condexp import block_decomposition, conjugate_weight, is_measurable
from .errors import (
    ConsistencyFailure,
    DimensionMismatch,
    NotInvertible,
    NotMeasurable,
    NotQuasiIsometry,
    NotRankOneCompatible,
    TruncationFailure,
    ZeroVector,
)
from .hilbert import (
    DEFAULT_TOL,
    MeasureSpace,
    Operator,
    _ortho_kernel,
    adjoint,
    from_ortho,
    inner,
    majorizes,
    numerical_rank,
    operator_norm,
    rank_one,
    spectral_radius,
    to_ortho,
    vnorm,
)

__all__ = [
    "IN",
    "OUT",
    "INCONCLUSIVE",
    "GrowthProfile",
    "Verdict",
    "RmFamily",
    "d_coeff",
    "alpha_m",
    "build_Rm",
    "build_Rm_family",
    "fit_tail_slope",
    "deddens_empirical",
    "bt_empirical",
    "span_residual",
    "deddens_rank_one",
    "bt_rank_one",
    "similarity_transport",
    "deddens_similar_rank_one",
    "rank_one_factor",
    "is_quasi_isometry",
    "deddens_quasi_isometry",
    "bt_quasi_isometry",
    "deddens_multiplication",
    "multiplication_pattern",
    "deddens_wct_block",
    "bt_wct",
    "bt_wct_peripheral",
]

IN = "In"
OUT = "Out"
INCONCLUSIVE = "Inconclusive"

# eigenvalues below this fraction of ||T|| count as the nilpotent part
_ZERO_EIG = 1e-6
# largest tolerated amplification rho^n of rounding errors in T^n S T^-n
_BUDGET = 0.5 * math.log(1.0 / np.finfo(float).eps)


@dataclass(frozen=True)
class GrowthProfile:
    indices: tuple
    values: tuple
    fitted_slope: float
    saturated: bool
    resolved_to: int = 0

    def as_dict(self):
        return {
            "indices": list(self.indices),
            "values": list(self.values),
            "fitted_slope": self.fitted_slope,
            "saturated": self.saturated,
            "resolved_to": self.resolved_to,
        }


@dataclass(frozen=True)
class Verdict:
    state: str
    constant: float
    profile: GrowthProfile
    reason: str = ""

    @property
    def conclusive(self):
        return self.state != INCONCLUSIVE

    @property
    def member(self):
        """True for In, False for Out, None when inconclusive."""
        return None if self.state == INCONCLUSIVE else self.state == IN


@dataclass(frozen=True)
class RmFamily:
    members: tuple = field(default=())
    radius: float = 0.0


def d_coeff(m, r):
    if m < 1:
        raise ValueError("m must be >= 1")
    if r < 0:
        raise ValueError("r must be >= 0")
    return 1.0 / (1.0 / m + r)


def alpha_m(m, r):
    """``sum_{n>=1} d_m^(2n)``; ``inf`` once ``d_m >= 1``."""
    d = d_coeff(m, r)
    if d >= 1.0:
        return math.inf
    d2 = d * d
    return d2 / (1.0 - d2)


def _herm_sqrt_and_inv(x):
    x = 0.5 * (x + x.conj().T)
    lam, v = np.linalg.eigh(x)
    lam = np.clip(lam, 0.0, None)
    root = np.sqrt(lam)
    return (v * root) @ v.conj().T, (v / root) @ v.conj().T, lam


def _build_Rm_ortho(t, m, r, tol):
    d = d_coeff(m, r)
    cap = 10 * tol.max_power
    x, terms, last, tail, ok = _accel.stein_partial_sum(t, d, tol.series_term_tol, cap)
    if not ok:
        raise TruncationFailure(
            f"R_{m} series not settled after {terms} terms (last term {last:.3e}, tail {tail:.3e})",
            terms=terms, last_term=last, tail=tail,
        )
    return x, terms, tail


def build_Rm(T, m, tol=DEFAULT_TOL, r=None):
    """``R_m = (sum_n d_m^(2n) T*^n T^n)^(1/2)`` from truncated partial sums.

    Returns ``(R_m, terms_used, tail_estimate)``.
    """
    if r is None:
        r = spectral_radius(T, tol)
    x, terms, tail = _build_Rm_ortho(to_ortho(T), m, r, tol)
    root, _, _ = _herm_sqrt_and_inv(x)
    return from_ortho(root, T.space), terms, tail


def build_Rm_family(T, tol=DEFAULT_TOL):
    r = spectral_radius(T, tol)
    members = []
    for m in range(1, tol.max_index + 1):
        R, terms, tail = build_Rm(T, m, tol, r=r)
        members.append((m, R, terms, tail))
    return RmFamily(tuple(members), r)


def fit_tail_slope(indices, values):
    """Least-squares slope of ``log(values)`` over the second half of the indices.

    Zero entries carry no growth information and are skipped; fewer than two
    usable points give slope 0.
    """
    idx = np.asarray(indices, dtype=float)
    val = np.asarray(values, dtype=float)
    if idx.size == 0:
        return 0.0
    cut = idx[idx.size // 2] if idx.size > 1 else idx[0]
    keep = (idx >= cut) & np.isfinite(val) & (val > 0)
    if np.count_nonzero(keep) < 2:
        return 0.0
    return float(np.polyfit(idx[keep], np.log(val[keep]), 1)[0])


def _classify(indices, values, tol, resolved_to, label, min_points=2):
    vals = tuple(float(v) for v in values)
    saturated = any(math.isinf(v) for v in vals)
    slope = fit_tail_slope(indices, vals)
    profile = GrowthProfile(tuple(int(i) for i in indices), vals, slope, saturated, resolved_to)
    if saturated:
        first = next(i for i, v in zip(indices, vals) if math.isinf(v))
        return Verdict(OUT, math.inf, profile, f"{label} infinite at index {first}")
    if any(math.isnan(v) for v in vals):
        return Verdict(INCONCLUSIVE, math.nan, profile, f"{label} not computable")
    if len(vals) < min_points:
        return Verdict(INCONCLUSIVE, math.nan, profile, f"only {len(vals)} resolved index")
    if slope > tol.growth_slope_tol:
        return Verdict(OUT, math.inf, profile, f"{label} grows, tail log-slope {slope:.4f}")
    return Verdict(IN, max(vals) if vals else 0.0, profile, f"{label} bounded, tail log-slope {slope:.4f}")


def _power_budget(t, nmax):
    """How many powers of ``t`` can be trusted before rounding errors dominate."""
    if not t.any():
        return nmax
    tn = float(np.linalg.norm(t, 2))
    mod = np.abs(np.linalg.eigvals(t))
    nz = mod[mod > _ZERO_EIG * tn]
    if nz.size == 0:
        return nmax
    rho = float(nz.max() / nz.min())
    if rho <= 1.0 + 1e-12:
        return nmax
    return int(max(1, min(nmax, math.floor(_BUDGET / math.log(rho)))))


def deddens_empirical(T, S, tol=DEFAULT_TOL):
    """Empirical membership of ``S`` in ``D_T``.

    ``c_n`` is the least ``M`` with ``||T^n S x|| <= M ||T^n x||``: infinite
    when ``ker T^n`` is not inside ``ker T^n S``, else ``||T^n S (T^n)^+||``.
    Powers are normalized, so only ratios matter.  The profile stops early
    when the spread of nonzero eigenvalue moduli would let rounding errors in
    ``T^n`` exceed ``sqrt(eps)``; the verdict reason records that.
    """
    if T.space != S.space:
        raise DimensionMismatch("operators live on different measure spaces")
    t = to_ortho(T)
    s = to_ortho(S)
    nmax = tol.max_power
    n_eff = _power_budget(t, nmax)
    powers, logs = _accel.normalized_powers(t, n_eff, tol.rank_tol)
    values = []
    for k in range(n_eff):
        if not np.isfinite(logs[k]):
            values.append(0.0)
            continue
        p = powers[k]
        ps = p @ s
        ps_norm = float(np.linalg.norm(ps, 2))
        if ps_norm == 0.0:
            values.append(0.0)
            continue
        ker = _ortho_kernel(p, tol.rank_tol)
        if ker.shape[1] and np.linalg.norm(ps @ ker, 2) > tol.residual_tol * ps_norm:
            values.append(math.inf)
            continue
        values.append(float(np.linalg.norm(ps @ np.linalg.pinv(p, rcond=tol.rank_tol), 2)))
    indices = list(range(1, n_eff + 1))
    v = _classify(indices, values, tol, n_eff, "c_n")
    if n_eff < nmax and v.state != OUT:
        v = Verdict(v.state, v.constant, v.profile, v.reason + f"; resolved to n={n_eff} of {nmax}")
    return v


def bt_empirical(T, S, tol=DEFAULT_TOL):
    """Empirical membership of ``S`` in ``B_T`` from ``beta_m = ||R_m S R_m^{-1}||``.

    Raises TruncationFailure when some ``R_m`` series does not settle.
    """
    if T.space != S.space:
        raise DimensionMismatch("operators live on different measure spaces")
    t = to_ortho(T)
    s = to_ortho(S)
    r = spectral_radius(T, tol)
    values = []
    for m in range(1, tol.max_index + 1):
        x, _, _ = _build_Rm_ortho(t, m, r, tol)
        root, inv, _ = _herm_sqrt_and_inv(x)
        values.append(float(np.linalg.norm(root @ s @ inv, 2)))
    return _classify(list(range(1, tol.max_index + 1)), values, tol, tol.max_index, "beta_m")


# ---------------------------------------------------------------------------
# rank-one and similar-to-rank-one operators
# ---------------------------------------------------------------------------

def _unit(space, y):
    y = space.vector(y)
    ny = vnorm(space, y)
    if ny == 0.0:
        raise ZeroVector("y must be nonzero")
    return y / ny


def span_residual(space, z, y):
    """Relative distance of ``z`` from ``span{y}`` (``y`` normalized first)."""
    y = _unit(space, y)
    z = space.vector(z)
    nz = vnorm(space, z)
    if nz == 0.0:
        return 0.0
    lam = inner(space, z, y)
    return vnorm(space, z - lam * y) / nz


def _eigen_law(y, S, tol):
    """``S* y ∈ span{y}``."""
    sy = adjoint(S) @ _unit(S.space, y)
    return span_residual(S.space, sy, y) <= tol.residual_tol


def _agree_or_raise(name, closed, verdict, extra=None):
    if verdict.conclusive and verdict.member != closed:
        routes = {"closed_form": closed, "empirical": verdict.state}
        if extra:
            routes.update(extra)
        raise ConsistencyFailure(name, routes, verdict.reason)


def deddens_rank_one(x, y, S, tol=DEFAULT_TOL, check=True):
    """``S ∈ D_{x⊗y}`` iff ``S* y`` is a multiple of ``y``.

    With ``check`` the answer is compared with :func:`deddens_empirical` for
    ``x⊗y`` and, when ``<x, y> != 0``, for its second and third powers too.
    """
    space = S.space
    y = space.vector(y)
    _unit(space, y)
    closed = _eigen_law(y, S, tol)
    if check:
        T = rank_one(space, x, y)
        powers = [1]
        xy = abs(inner(space, space.vector(x), y))
        if xy > tol.rank_tol * vnorm(space, x) * vnorm(space, y):
            powers += [2, 3]
        for n in powers:
            _agree_or_raise("deddens_rank_one", closed, deddens_empirical(T.power(n), S, tol), {"power": n})
    return closed


def bt_rank_one(y, S, tol=DEFAULT_TOL):
    """``S ∈ B_{x⊗y}`` iff ``y`` is an eigenvector of ``S*`` (eigenvalue 0 allowed)."""
    return _eigen_law(y, S, tol)


def _require_invertible(A, tol):
    if numerical_rank(A, tol) < A.dim:
        raise NotInvertible("similarity must be invertible")
    return Operator(np.linalg.inv(A.matrix), A.space)


@dataclass(frozen=True)
class TransportResult:
    C: Operator
    S_conj: Operator
    deddens: tuple
    bt: tuple
    power_residuals: tuple

    @property
    def agree(self):
        ok = True
        for a, b in (self.deddens, self.bt):
            if a.conclusive and b.conclusive:
                ok = ok and a.state == b.state
        return ok


def _bt_or_inconclusive(T, S, tol):
    try:
        return bt_empirical(T, S, tol)
    except TruncationFailure as exc:
        empty = GrowthProfile((), (), 0.0, False, 0)
        return Verdict(INCONCLUSIVE, math.nan, empty, str(exc))


def similarity_transport(A, T, S, tol=DEFAULT_TOL, strict=True):
    """Compare memberships of ``S`` for ``T`` with those of ``A S A^-1`` for ``C = A T A^-1``."""
    Ainv = _require_invertible(A, tol)
    C = A @ T @ Ainv
    S2 = A @ S @ Ainv
    res = []
    Tn = T
    Cn = C
    for n in range(1, 5):
        if n > 1:
            Tn = Tn @ T
            Cn = Cn @ C
        lhs = A @ Tn @ Ainv
        res.append(operator_norm(lhs - Cn) / max(1.0, operator_norm(Cn)))
    out = TransportResult(
        C, S2,
        (deddens_empirical(T, S, tol), deddens_empirical(C, S2, tol)),
        (_bt_or_inconclusive(T, S, tol), _bt_or_inconclusive(C, S2, tol)),
        tuple(res),
    )
    if strict:
        if max(res) > tol.residual_tol * 10:
            raise ConsistencyFailure("similarity_powers", {"max_residual": max(res)})
        if not out.agree:
            raise ConsistencyFailure(
                "similarity_transport",
                {"D_T": out.deddens[0].state, "D_C": out.deddens[1].state,
                 "B_T": out.bt[0].state, "B_C": out.bt[1].state},
            )
    return out


def deddens_similar_rank_one(A, x, y, S, tol=DEFAULT_TOL):
    """Membership of ``S`` in ``D_T`` for ``T = A^-1 (x⊗y) A``.

    ``T`` equals ``(A^-1 x) ⊗ (A* y)``, so the answer is the eigen-law for
    the vector ``A* y``.
    """
    space = S.space
    Ainv = _require_invertible(A, tol)
    x = space.vector(x)
    y = space.vector(y)
    _unit(space, y)
    ay = adjoint(A) @ y
    T = rank_one(space, Ainv @ x, ay)
    direct = Ainv @ rank_one(space, x, y) @ A
    gap = operator_norm(T - direct)
    if gap > tol.residual_tol * max(1.0, operator_norm(direct)):
        raise ConsistencyFailure("similar_rank_one_form", {"residual": gap})
    return _eigen_law(ay, S, tol)


def rank_one_factor(T, y, tol=DEFAULT_TOL):
    """Vector ``h`` with ``T = h ⊗ y`` when ``T*`` has range inside ``span{y}``."""
    space = T.space
    y = space.vector(y)
    ny2 = vnorm(space, y) ** 2
    if ny2 == 0.0:
        raise ZeroVector("y must be nonzero")
    h = (T @ y) / ny2
    tn = operator_norm(T)
    if tn == 0.0:
        return np.zeros(space.dim, dtype=complex)
    gap = operator_norm(T - rank_one(space, h, y))
    if gap > tol.residual_tol * tn:
        raise NotRankOneCompatible(f"||T - h⊗y|| / ||T|| = {gap / tn:.3e}")
    return h


# ---------------------------------------------------------------------------
# quasi-isometries
# ---------------------------------------------------------------------------

def is_quasi_isometry(T, tol=DEFAULT_TOL):
    Ts = adjoint(T)
    TsT = Ts @ T
    gap = operator_norm(Ts @ TsT @ T - TsT)
    return gap <= tol.residual_tol * max(1.0, operator_norm(TsT))


def deddens_quasi_isometry(T, S, tol=DEFAULT_TOL, check=True):
    """For a quasi-isometry, ``S ∈ D_T`` iff ``T`` majorizes ``T S``."""
    if not is_quasi_isometry(T, tol):
        raise NotQuasiIsometry("T*(T*T)T != T*T")
    closed = majorizes(T, T @ S, tol).holds
    if check:
        _agree_or_raise("deddens_quasi_isometry", closed, deddens_empirical(T, S, tol))
    return closed


def _qi_ratio(s, t, ts, alpha, x):
    nx = np.linalg.norm(x)
    num = np.linalg.norm(s @ x) + alpha * np.linalg.norm(ts @ x)
    den = nx + alpha * np.linalg.norm(t @ x)
    return num / den


def bt_quasi_isometry(T, S, tol=DEFAULT_TOL, samples=64):
    """B_T membership for a quasi-isometry via the two-term inequality.

    For each ``m`` the least ``M`` in
    ``||Sx|| + alpha_m ||TSx|| <= M (||x|| + alpha_m ||Tx||)`` is estimated
    as the largest ratio over a fixed sample of unit vectors plus the top
    generalized eigenvector of the squared problem.
    """
    if not is_quasi_isometry(T, tol):
        raise NotQuasiIsometry("T*(T*T)T != T*T")
    r = spectral_radius(T, tol)
    if r < 1.0 - tol.residual_tol:
        empty = GrowthProfile((), (), 0.0, False, 0)
        return Verdict(IN, math.inf, empty, "r(T) < 1: every alpha_m diverges, B_T is everything")
    t = to_ortho(T)
    s = to_ortho(S)
    ts = t @ s
    n = t.shape[0]
    rng = np.random.default_rng(0)
    probe = rng.standard_normal((n, samples)) + 1j * rng.standard_normal((n, samples))
    values = []
    for m in range(1, tol.max_index + 1):
        a = alpha_m(m, r)
        A = s.conj().T @ s + a * a * (ts.conj().T @ ts)
        B = np.eye(n) + a * a * (t.conj().T @ t)
        L = np.linalg.cholesky(B)
        Li = np.linalg.inv(L)
        _, vecs = np.linalg.eigh(Li @ A @ Li.conj().T)
        top = Li.conj().T @ vecs[:, -1]
        best = _qi_ratio(s, t, ts, a, top)
        for j in range(samples):
            best = max(best, _qi_ratio(s, t, ts, a, probe[:, j]))
        values.append(float(best))
    return _classify(list(range(1, tol.max_index + 1)), values, tol, tol.max_index, "M_m")


# ---------------------------------------------------------------------------
# multiplication and WCT operators
# ---------------------------------------------------------------------------

def multiplication_pattern(phi, S, tol=DEFAULT_TOL):
    """Entries ``(i, j)`` of ``S`` that break ``|phi_i| <= |phi_j|``."""
    s = to_ortho(S)
    if not s.any():
        return []
    mod = np.abs(S.space.vector(phi))
    big = np.abs(s) > tol.rank_tol * np.linalg.norm(s, 2)
    bad = big & (mod[:, None] > mod[None, :] + tol.rank_tol)
    return [tuple(ij) for ij in np.argwhere(bad).tolist()]


def deddens_multiplication(phi, S, tol=DEFAULT_TOL, check=True):
    """``S ∈ D_{M_phi}`` by the support pattern of ``S``.

    ``S`` belongs iff every entry ``S_ij`` that is numerically nonzero (in
    orthonormal coordinates) has ``|phi_i| <= |phi_j|``.  This is a derived
    finite-dimensional law, so ``check`` compares it with the empirical oracle.
    """
    closed = not multiplication_pattern(phi, S, tol)
    if check:
        M = Operator(np.diag(S.space.vector(phi)), S.space)
        _agree_or_raise("deddens_multiplication", closed, deddens_empirical(M, S, tol))
    return closed


def _wct_weight(W, a, tol):
    if a is None:
        a = conjugate_weight(W, tol)
        if a is None:
            raise ValueError("w is not of the form a*conj(u) with block-constant a")
        return a
    a = W.space.vector(a)
    if not is_measurable(W.partition, a, tol):
        raise NotMeasurable("a is not constant on the partition blocks")
    gap = np.max(np.abs(W.w - a * np.conj(W.u)))
    if gap > tol.residual_tol * max(1.0, float(np.max(np.abs(W.w)))):
        raise ValueError("w differs from a*conj(u)")
    return a


def _rel_gap(A, B, S):
    return operator_norm(A - B) / max(operator_norm(S), 1e-300)


def deddens_wct_block(W, a, S, tol=DEFAULT_TOL, check=True):
    """``S ∈ D_T`` for ``T = M_{a conj(u)} E M_u`` by the block criterion.

    ``a`` may be None, in which case it is recovered from ``w``.

    ``PSP = PS`` (``N(E M_u)`` invariant) and the compression of ``PSP`` to
    ``H1`` lies in the Deddens algebra of multiplication by ``a E|u|^2``.
    """
    a = _wct_weight(W, a, tol)
    bd = block_decomposition(W, tol)
    P = bd.P
    invariant = _rel_gap(P @ S @ P, P @ S, S) <= tol.residual_tol
    if bd.h1_basis:
        X = bd.compress(S)
        phi = np.array([a[W.partition.blocks[k][0]] * W.Eu2[W.partition.blocks[k][0]] for k in bd.h1_blocks])
        sub = MeasureSpace.uniform(len(bd.h1_basis))
        pattern_ok = deddens_multiplication(phi, Operator(X, sub), tol, check=check)
    else:
        pattern_ok = True
    closed = bool(invariant and pattern_ok)
    if check:
        _agree_or_raise("deddens_wct_block", closed, deddens_empirical(W.matrix, S, tol))
    return closed


def bt_wct(W, S, tol=DEFAULT_TOL, check=True):
    """``S ∈ B_T`` read as invariance of ``N(E M_u)`` under ``S``."""
    bd = block_decomposition(W, tol)
    Q = bd.Pperp
    closed = _rel_gap(Q @ S @ Q, S @ Q, S) <= tol.residual_tol
    if check:
        _agree_or_raise("bt_wct", closed, _bt_or_inconclusive(W.matrix, S, tol))
    return bool(closed)


def bt_wct_peripheral(W, a, S, tol=DEFAULT_TOL, check=False):
    """``S ∈ B_T`` for normal ``T = M_{a conj(u)} E M_u`` via peripheral blocks.

    The span of the H1 blocks where ``|a E|u|^2|`` is below ``r(T)``, together
    with ``N(E M_u)``, must be invariant under ``S``.  The growth that separates
    non-members is only about ``sqrt(m)``, which a 20-term profile often cannot
    resolve, so the empirical cross-check is off by default.
    """
    a = _wct_weight(W, a, tol)
    bd = block_decomposition(W, tol)
    space = W.space
    if not bd.h1_basis:
        return True
    mods = np.array([abs(a[W.partition.blocks[k][0]] * W.Eu2[W.partition.blocks[k][0]]) for k in bd.h1_blocks])
    r = mods.max()
    top = Operator(np.zeros((space.dim, space.dim)), space)
    for e, mod in zip(bd.h1_basis, mods):
        if mod >= r * (1.0 - tol.residual_tol):
            top = top + rank_one(space, e, e)
    rest = Operator(np.eye(space.dim), space) - top
    closed = operator_norm(top @ S @ rest) <= tol.residual_tol * max(operator_norm(S), 1e-300)
    if check:
        _agree_or_raise("bt_wct_peripheral", closed, _bt_or_inconclusive(W.matrix, S, tol))
    return bool(closed)
