import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from deddens import condexp as ce
from deddens import generate as gen
from deddens.errors import ValidationError
from deddens.algebras import span_residual
from deddens.hilbert import adjoint, inner, operator_norm, spectral_radius, vnorm
from deddens.scenario import emit_report, run_scenario


def test_quasi_isometry_example_spec():
    s = gen.generate(gen.GeneratorSpec("quasi_isometry_wct", 4, 2, seed=7))
    W = ce.wct(s.space(), s.partition(), s.vectors["u"], s.vectors["w"])
    assert ce.quasi_isometry_test(W, 1)
    np.testing.assert_allclose(np.abs(W.Euw), 1.0, atol=1e-12)


def test_quasinormal_example_recovers_constant():
    s = gen.generate(gen.GeneratorSpec("quasinormal_wct", 6, 3, seed=11))
    W = ce.wct(s.space(), s.partition(), s.vectors["u"], s.vectors["w"])
    res = ce.quasinormal_test(W)
    assert res.is_quasinormal
    sg = list(W.SG)
    np.testing.assert_allclose(res.v[sg], s.vectors["a"][sg], atol=1e-9)


@pytest.mark.parametrize("kind", gen.KINDS)
def test_same_spec_same_bytes(kind):
    spec = gen.GeneratorSpec(kind, 5, 2, seed=123)
    assert gen.generate(spec).to_json() == gen.generate(spec).to_json()
    other = gen.GeneratorSpec(kind, 5, 2, seed=124)
    assert gen.generate(spec).to_json() != gen.generate(other).to_json()


@pytest.mark.parametrize("kind", gen.KINDS)
@pytest.mark.parametrize("dim", [1, 2, 7, 16])
def test_generated_scenarios_run_clean(kind, dim):
    s = gen.generate(gen.GeneratorSpec(kind, dim, min(dim, 3), seed=dim))
    r = run_scenario(s)
    assert r.consistency_failures == 0, emit_report(r, "table")
    assert all(rec.error is None for rec in r.records)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"kind": "nope", "dim": 3},
        {"kind": "rank_one", "dim": 0},
        {"kind": "rank_one", "dim": 17},
        {"kind": "rank_one", "dim": 3, "blocks": 4},
        {"kind": "rank_one", "dim": 3, "condition_cap": 0.5},
        {"kind": "rank_one", "dim": 3, "seed": -1},
    ],
)
def test_generator_spec_validation(kwargs):
    with pytest.raises(ValidationError):
        gen.GeneratorSpec(**kwargs)


def test_max_dim_is_configurable():
    s = gen.generate(gen.GeneratorSpec("random_operator", 20, seed=1, max_dim=24))
    assert s.dim == 20


@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.floats(1.0, 1000.0))
def test_condition_cap_respected(seed, n, cap):
    rng = np.random.default_rng(seed)
    sp = gen.random_space(rng, n)
    A = gen.invertible_with_condition(rng, sp, cap)
    s = np.sqrt(sp.weights)
    sv = np.linalg.svd(s[:, None] * A.matrix / s[None, :], compute_uv=False)
    assert sv[0] / sv[-1] <= cap * (1 + 1e-9)


@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_rank_one_pair_overlap(seed, n):
    rng = np.random.default_rng(seed)
    sp = gen.random_space(rng, n)
    x, y = gen.rank_one_pair(rng, sp)
    assert vnorm(sp, x) == pytest.approx(1.0)
    assert vnorm(sp, y) == pytest.approx(1.0)
    assert 0.2 - 1e-12 <= abs(inner(sp, x, y)) <= 1 + 1e-12


@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_eigen_member_and_nonmember(seed, n):
    rng = np.random.default_rng(seed)
    sp = gen.random_space(rng, n)
    y = gen.unit_vector(rng, sp)
    S = gen.eigen_member(rng, sp, y, lam=1.5 - 0.5j, scale=2.0)
    assert span_residual(sp, adjoint(S) @ y, y) <= 1e-12
    assert operator_norm(S) == pytest.approx(2.0)
    N = gen.eigen_nonmember(rng, sp, y, base=S)
    assert span_residual(sp, adjoint(N) @ y, y) > 0.1


@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_normalized_operator_radius(seed, n):
    rng = np.random.default_rng(seed)
    T = gen.normalized_operator(rng, gen.random_space(rng, n))
    assert spectral_radius(T) == pytest.approx(1.0, rel=1e-8)


@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_polynomial_commutes(seed, n):
    rng = np.random.default_rng(seed)
    T = gen.normalized_operator(rng, gen.random_space(rng, n))
    S = gen.polynomial_in(rng, T)
    assert operator_norm(S @ T - T @ S) <= 1e-10 * max(1.0, operator_norm(S))
