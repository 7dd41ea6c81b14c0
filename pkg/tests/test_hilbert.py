import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from deddens.errors import ConsistencyFailure, DimensionMismatch, NotPositive
from deddens.hilbert import (
    DEFAULT_TOL,
    MeasureSpace,
    Operator,
    ToleranceConfig,
    adjoint,
    douglas_equivalences,
    hermitian_sqrt,
    identity,
    inner,
    kernel_basis,
    majorizes,
    numerical_rank,
    operator_norm,
    pinv,
    rank_one,
    spectral_radius,
    vnorm,
    zero,
)
from helpers import cmat, cvec, op
from strategies import operators, space_and_seed, spaces, vectors


def weighted_svd_norm(T):
    s = np.sqrt(T.space.weights)
    return np.linalg.svd(s[:, None] * T.matrix / s[None, :], compute_uv=False)[0]


# --- construction ----------------------------------------------------------

def test_measure_space_rejects_bad_masses():
    for bad in ([1, -1], [0, 1], [], [np.inf]):
        with pytest.raises(ValueError):
            MeasureSpace(np.array(bad, dtype=float))


def test_operator_shape_checked():
    with pytest.raises(DimensionMismatch):
        Operator(np.eye(3), MeasureSpace.uniform(2))


def test_operator_is_immutable():
    T = identity(MeasureSpace.uniform(2))
    with pytest.raises(ValueError):
        T.matrix[0, 0] = 5


def test_tolerance_config_validation():
    with pytest.raises(ValueError):
        ToleranceConfig(rank_tol=0.0)
    with pytest.raises(ValueError):
        ToleranceConfig(max_power=0)


def test_operators_on_different_spaces_do_not_mix():
    A = identity(MeasureSpace.uniform(2))
    B = identity(MeasureSpace(np.array([1.0, 2.0])))
    with pytest.raises(DimensionMismatch):
        A @ B


# --- inner ----------------------------------------------------------------

def test_inner_orthogonal_coordinates(uniform2):
    assert inner(uniform2, [1, 0], [0, 1]) == 0


def test_inner_weighted_sum():
    sp = MeasureSpace(np.array([1.0, 3.0]))
    assert inner(sp, [1, 1], [1, 1]) == pytest.approx(4.0)


def test_inner_dimension_mismatch(uniform2):
    with pytest.raises(DimensionMismatch):
        inner(uniform2, [1, 0, 0], [1, 0])


@given(st.data())
def test_inner_conjugate_symmetric_and_positive(data):
    sp = data.draw(spaces())
    f = data.draw(vectors(sp))
    g = data.draw(vectors(sp))
    assert inner(sp, f, g) == pytest.approx(np.conj(inner(sp, g, f)), abs=1e-12)
    ff = inner(sp, f, f)
    assert abs(ff.imag) <= 1e-12
    assert ff.real >= 0
    if ff.real == 0:
        assert not np.any(f)


# --- adjoint ----------------------------------------------------------------

def test_adjoint_identity():
    sp = MeasureSpace(np.array([1.0, 2.0, 5.0]))
    assert np.array_equal(adjoint(identity(sp)).matrix, np.eye(3))


def test_adjoint_of_diagonal_is_conjugate_for_any_weights(rng):
    sp = MeasureSpace(np.array([0.5, 2.0, 7.0]))
    u = cvec(rng, 3)
    A = adjoint(Operator(np.diag(u), sp))
    np.testing.assert_allclose(A.matrix, np.diag(np.conj(u)), atol=1e-14)


@given(st.data())
def test_adjoint_defining_identity(data):
    sp = data.draw(spaces())
    T = data.draw(operators(sp))
    f = data.draw(vectors(sp))
    g = data.draw(vectors(sp))
    lhs = inner(sp, T @ f, g)
    rhs = inner(sp, f, adjoint(T) @ g)
    scale = 1 + abs(lhs) + np.abs(T.matrix).sum() * vnorm(sp, f) * vnorm(sp, g)
    assert abs(lhs - rhs) <= 1e-12 * scale


@given(st.data())
def test_adjoint_involution(data):
    sp = data.draw(spaces())
    T = data.draw(operators(sp))
    np.testing.assert_allclose(adjoint(adjoint(T)).matrix, T.matrix, rtol=1e-13, atol=1e-13)


# --- operator_norm ------------------------------------------------------------

def test_norm_identity_and_nilpotent(uniform2):
    assert operator_norm(identity(uniform2)) == pytest.approx(1.0)
    assert operator_norm(op([[0, 1], [0, 0]], uniform2)) == pytest.approx(1.0)


def test_norm_zero(uniform2):
    assert operator_norm(zero(uniform2)) == 0.0


@given(st.data())
def test_norm_homogeneous_and_matches_sampling(data):
    sp = data.draw(spaces())
    T = data.draw(operators(sp))
    c = complex(data.draw(st.floats(-5, 5)), data.draw(st.floats(-5, 5)))
    nt = operator_norm(T)
    assert operator_norm(c * T) == pytest.approx(abs(c) * nt, rel=1e-12, abs=1e-12)
    assert nt == pytest.approx(weighted_svd_norm(T), rel=1e-12, abs=1e-12)
    f = data.draw(vectors(sp))
    if vnorm(sp, f) > 0:
        assert vnorm(sp, T @ f) <= nt * vnorm(sp, f) * (1 + 1e-12) + 1e-12


# --- spectral_radius ------------------------------------------------------------

def test_spectral_radius_examples(uniform2):
    assert spectral_radius(op([[0, 1], [0, 0]], uniform2)) == 0.0
    assert spectral_radius(op([[2, 0], [0, 0.5]], uniform2)) == pytest.approx(2.0, rel=1e-9)
    assert spectral_radius(zero(uniform2)) == 0.0


def test_spectral_radius_rank_one(rng):
    sp = MeasureSpace(np.array([1.0, 0.5, 2.0, 3.0]))
    x, y = cvec(rng, 4), cvec(rng, 4)
    r = spectral_radius(rank_one(sp, x, y))
    assert r == pytest.approx(abs(inner(sp, x, y)), rel=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_spectral_radius_matches_eigenvalues_on_diagonalizable(seed):
    rng = np.random.default_rng(seed)
    n = 2 + seed % 5
    sp = MeasureSpace(rng.uniform(0.5, 2.0, n))
    T = Operator(cmat(rng, n), sp)
    oracle = np.max(np.abs(np.linalg.eigvals(T.matrix)))
    assert spectral_radius(T) == pytest.approx(oracle, rel=1e-8)


def test_spectral_radius_jordan_block_converges():
    sp = MeasureSpace.uniform(3)
    J = op([[1.5, 1, 0], [0, 1.5, 1], [0, 0, 1.5]], sp)
    # Gelfand limit converges like n^(k/n); loose relative bound is the contract here
    assert spectral_radius(J) == pytest.approx(1.5, rel=1e-6)


# --- hermitian_sqrt ---------------------------------------------------------------

def test_sqrt_examples(uniform2):
    np.testing.assert_allclose(hermitian_sqrt(identity(uniform2)).matrix, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(hermitian_sqrt(op([[4, 0], [0, 9]], uniform2)).matrix,
                               np.diag([2, 3]), atol=1e-13)


@pytest.mark.parametrize("seed", range(6))
def test_sqrt_of_gram_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    n = 2 + seed
    sp = MeasureSpace(rng.uniform(0.5, 2.0, n))
    B = Operator(cmat(rng, n), sp)
    P = adjoint(B) @ B
    Q = hermitian_sqrt(P)
    assert operator_norm(Q @ Q - P) <= DEFAULT_TOL.residual_tol * operator_norm(P)
    assert operator_norm(adjoint(Q) - Q) <= 1e-12 * operator_norm(Q)
    s = np.sqrt(sp.weights)
    oracle = sla.sqrtm(s[:, None] * P.matrix / s[None, :])
    np.testing.assert_allclose(s[:, None] * Q.matrix / s[None, :], oracle, atol=1e-9)


def test_sqrt_rejects_negative(uniform2):
    with pytest.raises(NotPositive):
        hermitian_sqrt(op([[1, 0], [0, -1]], uniform2))


def test_sqrt_rejects_non_selfadjoint(uniform2):
    with pytest.raises(NotPositive):
        hermitian_sqrt(op([[1, 1], [0, 1]], uniform2))


# --- pinv ------------------------------------------------------------------------

def penrose_residuals(T, Tp):
    A = T @ Tp
    B = Tp @ T
    return [
        operator_norm(T @ Tp @ T - T),
        operator_norm(Tp @ T @ Tp - Tp),
        operator_norm(adjoint(A) - A),
        operator_norm(adjoint(B) - B),
    ]


def test_pinv_examples(rng):
    sp = MeasureSpace(np.array([1.0, 2.0, 3.0]))
    A = Operator(cmat(rng, 3) + 3 * np.eye(3), sp)
    np.testing.assert_allclose(pinv(A).matrix, np.linalg.inv(A.matrix), atol=1e-10)
    e = np.array([1.0, 1.0, 0.0])
    E = rank_one(sp, e, e) / vnorm(sp, e) ** 2
    np.testing.assert_allclose(pinv(E).matrix, E.matrix, atol=1e-12)
    assert not pinv(zero(sp)).matrix.any()


@given(st.data())
def test_pinv_penrose_identities(data):
    sp, seed = data.draw(space_and_seed())
    rng = np.random.default_rng(seed)
    n = sp.dim
    k = data.draw(st.integers(0, n))
    T = Operator(cmat(rng, n, k) @ cmat(rng, k, n) if k else np.zeros((n, n)), sp)
    Tp = pinv(T)
    scale = max(1.0, operator_norm(T), operator_norm(Tp)) ** 3
    assert max(penrose_residuals(T, Tp)) <= 1e-9 * scale


# --- kernel_basis / majorizes --------------------------------------------------------

def test_kernel_basis_examples(uniform2):
    assert kernel_basis(identity(uniform2)) == []
    ker = kernel_basis(op([[1, 0], [0, 0]], uniform2))
    assert len(ker) == 1
    np.testing.assert_allclose(np.abs(ker[0]), [0, 1], atol=1e-14)


@given(st.data())
def test_kernel_of_T_and_TsT_agree(data):
    sp, seed = data.draw(space_and_seed(2, 6))
    rng = np.random.default_rng(seed)
    n = sp.dim
    k = data.draw(st.integers(0, n - 1))
    T = Operator(cmat(rng, n, k) @ cmat(rng, k, n) if k else np.zeros((n, n)), sp)
    K1 = kernel_basis(T)
    K2 = kernel_basis(adjoint(T) @ T)
    assert len(K1) == len(K2) == n - numerical_rank(T)
    for v in K1:
        assert vnorm(sp, v) == pytest.approx(1.0)
        assert vnorm(sp, T @ v) <= 1e-9 * max(1.0, operator_norm(T))
    G = np.array([[inner(sp, a, b) for b in K1] for a in K1])
    if K1:
        np.testing.assert_allclose(G, np.eye(len(K1)), atol=1e-10)


def test_majorizes_examples(uniform2, rng):
    T = Operator(cmat(rng, 2), uniform2)
    r = majorizes(T, zero(uniform2))
    assert r.holds and r.constant == 0.0
    r = majorizes(T, T)
    assert r.holds and r.constant == pytest.approx(1.0)
    r = majorizes(op([[1, 0], [0, 0]], uniform2), op([[0, 0], [0, 1]], uniform2))
    assert not r.holds
    np.testing.assert_allclose(np.abs(r.violating_direction), [0, 1], atol=1e-12)


@given(st.data())
def test_majorization_constant_is_tight(data):
    sp, seed = data.draw(space_and_seed(2, 5))
    rng = np.random.default_rng(seed)
    n = sp.dim
    T = Operator(cmat(rng, n), sp)
    S = Operator(cmat(rng, n), sp)
    r = majorizes(T, S)
    assert r.holds and np.isfinite(r.constant) and r.constant >= 0
    for _ in range(20):
        x = cvec(rng, n)
        assert vnorm(sp, S @ x) <= r.constant * vnorm(sp, T @ x) * (1 + 1e-8) + 1e-12
    # the constant is attained: ||S T^-1 z|| / ||z|| at the top singular vector
    M = S @ pinv(T)
    assert operator_norm(M) == pytest.approx(r.constant, rel=1e-9)


# --- Douglas ------------------------------------------------------------------

def test_douglas_examples(uniform2, rng):
    T = Operator(cmat(rng, 2), uniform2)
    r = douglas_equivalences(T, T)
    assert r.range_inclusion and r.adjoint_majorization and r.factorization
    np.testing.assert_allclose((T @ r.factor).matrix, T.matrix, atol=1e-10)
    r2 = douglas_equivalences(T, 2 * T)
    np.testing.assert_allclose(r2.factor.matrix, 2 * np.eye(2), atol=1e-9)
    r3 = douglas_equivalences(op([[1, 0], [0, 0]], uniform2), op([[0, 0], [0, 1]], uniform2))
    assert not (r3.range_inclusion or r3.adjoint_majorization or r3.factorization)
    assert r3.factor is None


def test_douglas_on_singular_T_with_factor(rng):
    sp = MeasureSpace(np.array([1.0, 2.0, 0.5, 1.5]))
    T = Operator(cmat(rng, 4, 2) @ cmat(rng, 2, 4), sp)
    U = Operator(cmat(rng, 4), sp)
    r = douglas_equivalences(T, T @ U)
    assert r.agree and r.factorization
    bad = Operator(cmat(rng, 4), sp)
    r = douglas_equivalences(T, bad)
    assert r.agree and not r.factorization


def test_douglas_disagreement_is_reported(monkeypatch, uniform2):
    import deddens.hilbert as h

    real = h.majorizes
    monkeypatch.setattr(h, "majorizes", lambda T, S, tol=DEFAULT_TOL: real(S, T, tol))
    T = op([[1, 0], [0, 0]], uniform2)
    with pytest.raises(ConsistencyFailure) as info:
        h.douglas_equivalences(identity(uniform2), T)
    assert "adjoint_majorization" in info.value.verdicts


# --- rank_one -------------------------------------------------------------

def test_rank_one_basis_example(uniform2):
    np.testing.assert_array_equal(rank_one(uniform2, [1, 0], [0, 1]).matrix, [[0, 1], [0, 0]])


@given(st.data())
def test_rank_one_action_and_norm(data):
    sp = data.draw(spaces())
    x = data.draw(vectors(sp))
    y = data.draw(vectors(sp))
    h = data.draw(vectors(sp))
    R = rank_one(sp, x, y)
    np.testing.assert_allclose(R @ h, inner(sp, h, y) * x, atol=1e-10 * (1 + np.abs(x).max() * 100))
    expected = vnorm(sp, x) * vnorm(sp, y)
    assert operator_norm(R) == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_rank_one_nilpotent_when_orthogonal():
    sp = MeasureSpace(np.array([1.0, 2.0, 3.0]))
    x = np.array([2.0, -1.0, 0.0])
    y = np.array([1.0, 1.0, 5.0])
    assert abs(inner(sp, x, y)) < 1e-15
    assert operator_norm(rank_one(sp, x, y).power(2)) <= 1e-13


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_rank_one_power_law(n, rng):
    sp = MeasureSpace(np.array([0.5, 1.0, 2.0]))
    x, y = cvec(rng, 3), cvec(rng, 3)
    R = rank_one(sp, x, y)
    lhs = R.power(n)
    rhs = inner(sp, x, y) ** (n - 1) * R
    assert operator_norm(lhs - rhs) <= 1e-12 * operator_norm(lhs)
