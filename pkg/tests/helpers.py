"""Small constructors shared by the test modules."""

import numpy as np

from deddens.condexp import Partition
from deddens.hilbert import Operator


def cmat(rng, n, m=None):
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def cvec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def op(rows, space):
    return Operator(np.asarray(rows, dtype=complex), space)


def part(space, blocks):
    return Partition(tuple(tuple(b) for b in blocks), space)


def dense(T):
    """Plain ndarray of an Operator."""
    return np.asarray(T.matrix)
