"""Hot numeric kernels with an optional numba backend.

Every kernel exists twice: a plain numpy version (``*_numpy``) and a loop
version compiled with ``numba.njit`` (``*_numba``).  The public names bound at
import time follow the ``DEDDENS_NUMBA`` environment variable:

    DEDDENS_NUMBA=0   force the numpy path
    DEDDENS_NUMBA=1   require numba (ImportError if missing)
    unset             numba when importable, numpy otherwise

All kernels work on matrices already expressed in orthonormal coordinates
(see ``hilbert.to_ortho``); none of them knows about measure weights.
"""

import logging
import os

import numpy as np

logger = logging.getLogger(__name__)

_flag = os.environ.get("DEDDENS_NUMBA", "").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

if _flag in ("0", "false", "no", "off"):
    USE_NUMBA = False
elif _flag in ("1", "true", "yes", "on"):
    if not HAVE_NUMBA:
        raise ImportError("DEDDENS_NUMBA=1 but numba is not importable")
    USE_NUMBA = True
else:
    USE_NUMBA = HAVE_NUMBA

BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# block means (conditional expectation on a partition)
# ---------------------------------------------------------------------------

def block_mean_numpy(f, labels, weights, nblocks):
    mass = np.bincount(labels, weights=weights, minlength=nblocks)
    wf = weights * f
    sums = np.bincount(labels, weights=wf.real, minlength=nblocks) + 1j * np.bincount(
        labels, weights=wf.imag, minlength=nblocks
    )
    return (sums / mass)[labels]


def _block_mean_loop(f, labels, weights, nblocks):
    sums = np.zeros(nblocks, dtype=np.complex128)
    mass = np.zeros(nblocks, dtype=np.float64)
    for i in range(f.shape[0]):
        b = labels[i]
        sums[b] += weights[i] * f[i]
        mass[b] += weights[i]
    out = np.empty(f.shape[0], dtype=np.complex128)
    for i in range(f.shape[0]):
        out[i] = sums[labels[i]] / mass[labels[i]]
    return out


# ---------------------------------------------------------------------------
# Gelfand limit by repeated squaring
# ---------------------------------------------------------------------------

def gelfand_radius_numpy(a, rtol, kmax):
    """Return (estimate, squarings) for lim ||A^(2^k)||^(1/2^k)."""
    nrm = np.linalg.norm(a)
    if nrm == 0.0:
        return 0.0, 0
    x = a / nrm
    logn = np.log(nrm)
    prev = nrm
    hits = 0
    for k in range(1, kmax + 1):
        x = x @ x
        s = np.linalg.norm(x)
        if s == 0.0:
            return 0.0, k
        x = x / s
        logn = 2.0 * logn + np.log(s)
        est = np.exp(logn / 2.0**k)
        if abs(est - prev) <= rtol * est:
            hits += 1
            if hits >= 2:
                return est, k
        else:
            hits = 0
        prev = est
    return prev, kmax


def _gelfand_radius_loop(a, rtol, kmax):
    nrm = np.sqrt(np.sum(np.abs(a) ** 2))
    if nrm == 0.0:
        return 0.0, 0
    x = np.ascontiguousarray(a / nrm)
    logn = np.log(nrm)
    prev = nrm
    hits = 0
    for k in range(1, kmax + 1):
        x = x @ x
        s = np.sqrt(np.sum(np.abs(x) ** 2))
        if s == 0.0:
            return 0.0, k
        x = x / s
        logn = 2.0 * logn + np.log(s)
        est = np.exp(logn / 2.0**k)
        if abs(est - prev) <= rtol * est:
            hits += 1
            if hits >= 2:
                return est, k
        else:
            hits = 0
        prev = est
    return prev, kmax


# ---------------------------------------------------------------------------
# partial sums of sum_n d^(2n) A*^n A^n
# ---------------------------------------------------------------------------

def stein_partial_sum_numpy(a, d, tol, max_terms):
    """Accumulate I + sum_{n>=1} (d^n A^n)^* (d^n A^n).

    Returns (X, n_used, last_term, tail_estimate, converged).  Stops once three
    consecutive term norms are below ``tol`` and the geometric tail estimate
    (from the ratio of the last two terms) is below ``tol`` as well.
    """
    n = a.shape[0]
    x = np.eye(n, dtype=np.complex128)
    q = np.eye(n, dtype=np.complex128)
    da = d * a
    small = 0
    prev_t = 1.0
    t = 1.0
    tail = np.inf
    for k in range(1, max_terms + 1):
        q = da @ q
        term = q.conj().T @ q
        x += term
        t = float(np.linalg.norm(term))
        if t == 0.0:
            return x, k, 0.0, 0.0, True
        ratio = t / prev_t if prev_t > 0.0 else 1.0
        tail = t * ratio / (1.0 - ratio) if ratio < 1.0 else np.inf
        prev_t = t
        if t < tol:
            small += 1
            if small >= 3 and tail <= tol:
                return x, k, t, tail, True
        else:
            small = 0
    return x, max_terms, t, tail, False


def _stein_partial_sum_loop(a, d, tol, max_terms):
    n = a.shape[0]
    x = np.eye(n, dtype=np.complex128)
    q = np.eye(n, dtype=np.complex128)
    da = np.ascontiguousarray(d * a)
    small = 0
    prev_t = 1.0
    t = 1.0
    tail = np.inf
    for k in range(1, max_terms + 1):
        q = da @ q
        term = np.ascontiguousarray(np.conj(q).T) @ q
        x += term
        t = np.sqrt(np.sum(np.abs(term) ** 2))
        if t == 0.0:
            return x, k, 0.0, 0.0, True
        ratio = t / prev_t if prev_t > 0.0 else 1.0
        tail = t * ratio / (1.0 - ratio) if ratio < 1.0 else np.inf
        prev_t = t
        if t < tol:
            small += 1
            if small >= 3 and tail <= tol:
                return x, k, t, tail, True
        else:
            small = 0
    return x, max_terms, t, tail, False


# ---------------------------------------------------------------------------
# normalized power sequence
# ---------------------------------------------------------------------------

def normalized_powers_numpy(a, nmax, zero_tol):
    """Stack of A^n / ||A^n||_F for n = 1..nmax and their log norms.

    A power whose norm falls below ``zero_tol`` times ||A||_F * ||previous||
    is declared exactly zero (log norm -inf), and so are all later ones.
    """
    n = a.shape[0]
    out = np.zeros((nmax, n, n), dtype=np.complex128)
    logs = np.full(nmax, -np.inf)
    anorm = np.linalg.norm(a)
    if anorm == 0.0:
        return out, logs
    p = a / anorm
    out[0] = p
    logs[0] = np.log(anorm)
    for k in range(1, nmax):
        p = a @ p
        s = np.linalg.norm(p)
        if s <= zero_tol * anorm:
            break
        p = p / s
        out[k] = p
        logs[k] = logs[k - 1] + np.log(s)
    return out, logs


def _normalized_powers_loop(a, nmax, zero_tol):
    n = a.shape[0]
    out = np.zeros((nmax, n, n), dtype=np.complex128)
    logs = np.full(nmax, -np.inf)
    anorm = np.sqrt(np.sum(np.abs(a) ** 2))
    if anorm == 0.0:
        return out, logs
    ac = np.ascontiguousarray(a)
    p = ac / anorm
    out[0] = p
    logs[0] = np.log(anorm)
    for k in range(1, nmax):
        p = ac @ p
        s = np.sqrt(np.sum(np.abs(p) ** 2))
        if s <= zero_tol * anorm:
            break
        p = p / s
        out[k] = p
        logs[k] = logs[k - 1] + np.log(s)
    return out, logs


if HAVE_NUMBA:
    block_mean_numba = numba.njit(cache=True)(_block_mean_loop)
    gelfand_radius_numba = numba.njit(cache=True)(_gelfand_radius_loop)
    stein_partial_sum_numba = numba.njit(cache=True)(_stein_partial_sum_loop)
    normalized_powers_numba = numba.njit(cache=True)(_normalized_powers_loop)
else:  # pragma: no cover
    block_mean_numba = _block_mean_loop
    gelfand_radius_numba = _gelfand_radius_loop
    stein_partial_sum_numba = _stein_partial_sum_loop
    normalized_powers_numba = _normalized_powers_loop


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


if USE_NUMBA:

    def block_mean(f, labels, weights, nblocks):
        return block_mean_numba(
            _c(f), np.ascontiguousarray(labels, dtype=np.int64),
            np.ascontiguousarray(weights, dtype=np.float64), int(nblocks),
        )

    def gelfand_radius(a, rtol, kmax):
        est, k = gelfand_radius_numba(_c(a), float(rtol), int(kmax))
        return float(est), int(k)

    def stein_partial_sum(a, d, tol, max_terms):
        x, k, t, tail, ok = stein_partial_sum_numba(_c(a), float(d), float(tol), int(max_terms))
        return x, int(k), float(t), float(tail), bool(ok)

    def normalized_powers(a, nmax, zero_tol):
        return normalized_powers_numba(_c(a), int(nmax), float(zero_tol))

else:
    block_mean = block_mean_numpy
    gelfand_radius = gelfand_radius_numpy
    stein_partial_sum = stein_partial_sum_numpy
    normalized_powers = normalized_powers_numpy

logger.debug("deddens kernels using %s backend", BACKEND)
