"""Hypothesis strategies for weighted spaces, operators and partitions."""

import numpy as np
from hypothesis import strategies as st

from deddens.condexp import Partition
from deddens.hilbert import MeasureSpace, Operator

finite = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)


@st.composite
def spaces(draw, min_dim=1, max_dim=6):
    n = draw(st.integers(min_dim, max_dim))
    w = draw(st.lists(st.floats(0.25, 4.0), min_size=n, max_size=n))
    return MeasureSpace(np.array(w))


@st.composite
def vectors(draw, space):
    re = draw(st.lists(finite, min_size=space.dim, max_size=space.dim))
    im = draw(st.lists(finite, min_size=space.dim, max_size=space.dim))
    return np.array(re) + 1j * np.array(im)


@st.composite
def operators(draw, space):
    n = space.dim
    re = draw(st.lists(finite, min_size=n * n, max_size=n * n))
    im = draw(st.lists(finite, min_size=n * n, max_size=n * n))
    return Operator((np.array(re) + 1j * np.array(im)).reshape(n, n), space)


@st.composite
def partitions(draw, space):
    k = draw(st.integers(1, space.dim))
    labels = [draw(st.integers(0, k - 1)) for _ in range(space.dim)]
    return Partition.from_labels(space, labels)


@st.composite
def space_and_seed(draw, min_dim=1, max_dim=6):
    return draw(spaces(min_dim, max_dim)), draw(st.integers(0, 2**32 - 1))
