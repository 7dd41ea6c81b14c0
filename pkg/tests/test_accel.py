"""Parity between the numba kernels and their numpy fallbacks."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from deddens import _accel

numba_only = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


def _mat(seed, n, scale=1.0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    r = np.max(np.abs(np.linalg.eigvals(a)))
    return np.ascontiguousarray(a * scale / r)


@numba_only
@given(st.integers(0, 2**32 - 1), st.integers(1, 12), st.integers(1, 4))
def test_block_mean_parity(seed, n, k):
    rng = np.random.default_rng(seed)
    k = min(k, n)
    labels = np.concatenate([np.arange(k), rng.integers(0, k, n - k)]).astype(np.int64)
    w = rng.uniform(0.5, 2.0, n)
    f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    a = _accel.block_mean_numpy(f, labels, w, k)
    b = _accel.block_mean_numba(f, labels, w, k)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-14)


@numba_only
@pytest.mark.parametrize("seed", range(8))
def test_gelfand_parity_and_oracle(seed):
    a = _mat(seed, 2 + seed % 6, scale=0.5 + seed)
    e1, k1 = _accel.gelfand_radius_numpy(a, 1e-12, 64)
    e2, k2 = _accel.gelfand_radius_numba(a, 1e-12, 64)
    assert e1 == pytest.approx(e2, rel=1e-10)
    assert e1 == pytest.approx(0.5 + seed, rel=1e-8)


@numba_only
@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("d", [0.3, 0.9])
def test_stein_partial_sum_parity(seed, d):
    a = _mat(seed, 2 + seed)
    x1, n1, last1, tail1, ok1 = _accel.stein_partial_sum_numpy(a, d, 1e-14, 400)
    x2, n2, last2, tail2, ok2 = _accel.stein_partial_sum_numba(a, d, 1e-14, 400)
    assert ok1 and ok2
    assert abs(n1 - n2) <= 1
    np.testing.assert_allclose(x1, x2, rtol=1e-11, atol=1e-11 * np.abs(x1).max())


@numba_only
@pytest.mark.parametrize("seed", range(6))
def test_normalized_powers_parity(seed):
    a = _mat(seed, 2 + seed, scale=1.5)
    p1, l1 = _accel.normalized_powers_numpy(a, 15, 1e-10)
    p2, l2 = _accel.normalized_powers_numba(a, 15, 1e-10)
    np.testing.assert_allclose(l1, l2, rtol=1e-11)
    np.testing.assert_allclose(p1, p2, atol=1e-10)
    # the k-th normalized power times exp(logs[k]) reconstructs A^(k+1)
    direct = np.linalg.matrix_power(a, 4)
    np.testing.assert_allclose(p1[3] * np.exp(l1[3]), direct, rtol=1e-10, atol=1e-12 * np.abs(direct).max())


def test_nilpotent_powers_report_zero():
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    p, logs = _accel.normalized_powers_numpy(a, 4, 1e-10)
    assert np.isfinite(logs[0])
    assert not np.isfinite(logs[1])


def _backend_report(flag):
    code = (
        "import json,deddens._accel as a;"
        "from deddens.generate import GeneratorSpec, generate;"
        "from deddens.scenario import run_scenario;"
        "r = run_scenario(generate(GeneratorSpec('rank_one', 5, seed=2)));"
        "print(json.dumps({'backend': a.BACKEND,"
        " 'outcomes': [str(x.outcome) for x in r.records],"
        " 'failures': r.consistency_failures}))"
    )
    env = dict(os.environ, DEDDENS_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def test_flag_forces_numpy_backend():
    assert _backend_report("0")["backend"] == "numpy"


@numba_only
def test_backends_give_same_verdicts():
    a = _backend_report("0")
    b = _backend_report("1")
    assert b["backend"] == "numba"
    assert a["outcomes"] == b["outcomes"]
    assert a["failures"] == b["failures"] == 0
