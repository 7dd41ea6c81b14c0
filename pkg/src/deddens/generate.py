"""Seeded random instances for every operator class.

The low-level builders take a ``numpy.random.Generator`` and return arrays or
operators; :func:`generate` wraps them into a ready-to-run :class:`Scenario`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import condexp as ce
from . import hilbert as hb
from .errors import ValidationError
from .hilbert import MeasureSpace, Operator
from .scenario import Scenario

__all__ = [
    "KINDS",
    "GeneratorSpec",
    "generate",
    "random_space",
    "random_partition",
    "cvec",
    "cmat",
    "random_unitary",
    "unit_vector",
    "rank_one_pair",
    "eigen_member",
    "eigen_nonmember",
    "invertible_with_condition",
    "quasi_isometry_weights",
    "quasinormal_weights",
    "random_wct_vectors",
    "polynomial_in",
    "normalized_operator",
]

KINDS = (
    "rank_one",
    "similar_rank_one",
    "quasi_isometry_wct",
    "quasinormal_wct",
    "random_wct",
    "commutant_member",
    "random_operator",
)


def cvec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def cmat(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def random_space(rng, n, spread=2.0):
    return MeasureSpace(rng.uniform(1.0 / spread, spread, n))


def random_partition(rng, space, k):
    """Random partition of the atoms into exactly ``k`` nonempty blocks."""
    n = space.dim
    labels = np.concatenate([np.arange(k), rng.integers(0, k, n - k)])
    rng.shuffle(labels)
    return ce.Partition.from_labels(space, labels)


def random_unitary(rng, n):
    q, r = np.linalg.qr(cmat(rng, n))
    d = np.diag(r)
    return q * (d / np.abs(d))[None, :]


def unit_vector(rng, space):
    v = cvec(rng, space.dim)
    return v / hb.vnorm(space, v)


def rank_one_pair(rng, space, min_overlap=0.2):
    """Unit vectors ``x, y`` with ``min_overlap <= |<x, y>| <= 1``."""
    y = unit_vector(rng, space)
    c = rng.uniform(min_overlap, 1.0) * np.exp(2j * np.pi * rng.uniform())
    if space.dim == 1:
        return c / abs(c) * y, y
    z = unit_vector(rng, space)
    z = z - hb.inner(space, z, y) * y
    z = z / hb.vnorm(space, z)
    x = c * y + np.sqrt(1.0 - abs(c) ** 2) * z
    return x, y


def eigen_member(rng, space, y, lam=None, scale=1.0):
    """Random ``S`` with ``||S|| = scale`` and ``y`` an eigenvector of ``S*``.

    The eigenvalue is ``lam`` before the final rescaling to norm ``scale``.
    """
    y = space.vector(y)
    if lam is None:
        lam = complex(*rng.standard_normal(2))
    B = Operator(cmat(rng, space.dim), space)
    Bs = hb.adjoint(B)
    ny2 = hb.vnorm(space, y) ** 2
    Ss = Bs - hb.rank_one(space, Bs @ y - lam * y, y) / ny2
    S = hb.adjoint(Ss)
    return S * (scale / hb.operator_norm(S))


def eigen_nonmember(rng, space, y, base=None, gamma=None):
    """Add ``gamma (y ⊗ v)`` with unit ``v ⊥ y`` to a member, so ``S* y`` leaves ``span{y}``."""
    if base is None:
        base = eigen_member(rng, space, y)
    y = space.vector(y) / hb.vnorm(space, y)
    v = unit_vector(rng, space)
    v = v - hb.inner(space, v, y) * y
    v = v / hb.vnorm(space, v)
    if gamma is None:
        gamma = rng.uniform(2.0, 4.0)
    return base + hb.rank_one(space, y, v) * (gamma * hb.operator_norm(base))


def invertible_with_condition(rng, space, cap):
    """Random invertible operator whose weighted condition number is at most ``cap``."""
    n = space.dim
    s = np.exp(rng.uniform(0.0, np.log(cap), n))
    s[0] = 1.0
    s = s / s.min()
    m = (random_unitary(rng, n) * s[None, :]) @ random_unitary(rng, n)
    return hb.from_ortho(m, space)


def _nonzero_u(rng, space, partition):
    u = cvec(rng, space.dim)
    for b in partition.blocks:
        if np.all(np.abs(u[list(b)]) == 0):
            u[b[0]] = 1.0
    return u


def quasi_isometry_weights(rng, space, partition):
    """``(u, w, c)`` with ``w = c conj(u) / E|u|^2`` and unimodular block-constant ``c``."""
    u = _nonzero_u(rng, space, partition)
    eu2 = ce.conditional_mean(partition, np.abs(u) ** 2).real
    c = np.exp(2j * np.pi * rng.uniform(size=partition.nblocks))[partition.labels]
    return u, c * np.conj(u) / eu2, c


def quasinormal_weights(rng, space, partition, radius=1.0):
    """``(u, w, c)`` with ``w = c conj(u)`` for block-constant ``c``.

    ``c`` is scaled so that ``r(T) = max |c E|u|^2|`` equals ``radius``; block
    moduli are drawn from a fixed ladder so distinct blocks are well separated.
    """
    u = _nonzero_u(rng, space, partition)
    eu2 = ce.conditional_mean(partition, np.abs(u) ** 2).real
    k = partition.nblocks
    ladder = np.array([1.0, 1.0 / 1.5, 1.0 / 2.25, 1.0 / 3.375])
    mod = rng.choice(ladder, k)
    phase = np.exp(2j * np.pi * rng.uniform(size=k))
    blk_eu2 = eu2[[b[0] for b in partition.blocks]]
    c_blk = radius * mod * phase / blk_eu2 / mod.max()
    c = c_blk[partition.labels]
    return u, c * np.conj(u), c


def random_wct_vectors(rng, space, partition, zero_prob=0.25):
    """Random ``u, w``; each may vanish on whole blocks with probability ``zero_prob``."""
    u = cvec(rng, space.dim)
    w = cvec(rng, space.dim)
    for b in partition.blocks:
        b = list(b)
        if rng.uniform() < zero_prob:
            u[b] = 0.0
        if rng.uniform() < zero_prob:
            w[b] = 0.0
    return u, w


def polynomial_in(rng, T, degree=None):
    """``p(T)`` for a random complex polynomial of degree at most 3."""
    if degree is None:
        degree = int(rng.integers(0, 4))
    coef = cvec(rng, degree + 1)
    out = hb.identity(T.space) * coef[0]
    P = hb.identity(T.space)
    for c in coef[1:]:
        P = P @ T
        out = out + P * c
    return out


def normalized_operator(rng, space, radius=1.0):
    """Random operator rescaled to spectral radius ``radius``."""
    T = Operator(cmat(rng, space.dim), space)
    r = hb.spectral_radius(T)
    return T * (radius / r) if r > 0 else T


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    dim: int
    blocks: int = 1
    seed: int = 0
    condition_cap: float = 100.0
    max_dim: int = 16

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown kind {self.kind!r}; choose from {', '.join(KINDS)}", "kind")
        if not 1 <= self.dim <= self.max_dim:
            raise ValidationError(f"dim must be in 1..{self.max_dim}", "dim")
        if not 1 <= self.blocks <= self.dim:
            raise ValidationError("blocks must be in 1..dim", "blocks")
        if not self.condition_cap >= 1:
            raise ValidationError("condition_cap must be >= 1", "condition_cap")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer", "seed")


def _t(kind, expect=None, **args):
    t = {"kind": kind, "args": args}
    if expect is not None:
        t["expect"] = expect
    return t


def generate(spec):
    """Build a deterministic scenario of the requested kind."""
    rng = np.random.default_rng(spec.seed)
    space = random_space(rng, spec.dim)
    part = random_partition(rng, space, spec.blocks)
    vectors, operators, tests = {}, {}, []
    n = spec.dim

    if spec.kind in ("rank_one", "similar_rank_one"):
        x, y = rank_one_pair(rng, space)
        vectors.update(x=x, y=y)
        T = hb.rank_one(space, x, y)
        if spec.kind == "similar_rank_one":
            A = invertible_with_condition(rng, space, spec.condition_cap)
            Ainv = Operator(np.linalg.inv(A.matrix), space)
            T = Ainv @ T @ A
            ay = hb.adjoint(A) @ y
            S_in = eigen_member(rng, space, ay)
            operators.update(A=A.matrix, T=T.matrix, S_in=S_in.matrix)
            tests.append(_t("deddens_similar_rank_one", True, S="S_in"))
            if n > 1:
                operators["S_out"] = eigen_nonmember(rng, space, ay, base=S_in).matrix
                tests.append(_t("deddens_similar_rank_one", False, S="S_out"))
            tests.append(_t("similarity_transport", True, S="S_in"))
        else:
            S_in = eigen_member(rng, space, y)
            operators.update(T=T.matrix, S_in=S_in.matrix)
            tests += [
                _t("deddens_rank_one", True, S="S_in"),
                _t("bt_rank_one", True, S="S_in"),
                _t("bt_empirical", "In", S="S_in"),
                _t("rank_one_factor", True),
            ]
            if n > 1:
                operators["S_out"] = eigen_nonmember(rng, space, y, base=S_in).matrix
                tests += [
                    _t("deddens_rank_one", False, S="S_out"),
                    _t("bt_rank_one", False, S="S_out"),
                    _t("bt_empirical", "Out", S="S_out"),
                ]

    elif spec.kind == "quasi_isometry_wct":
        u, w, c = quasi_isometry_weights(rng, space, part)
        vectors.update(u=u, w=w, c=c)
        operators["S"] = cmat(rng, n)
        tests += [
            _t("quasi_isometry", True, n=1),
            _t("quasi_isometry", True, n=2),
            _t("quasi_isometry", True, n=3),
            _t("power_identity", True),
            _t("wct_norm", True),
            _t("composition", True),
            _t("deddens_quasi_isometry"),
            _t("bt_quasi_isometry", "In", S="I"),
        ]

    elif spec.kind == "quasinormal_wct":
        u, w, c = quasinormal_weights(rng, space, part)
        vectors.update(u=u, w=w, a=c)
        operators["S"] = cmat(rng, n)
        tests += [
            _t("quasinormal", True),
            _t("pinv"),
            _t("partial_isometry"),
            _t("block_decomposition", True),
            _t("deddens_wct_block", True, S="T"),
            _t("deddens_wct_block", True, S="I"),
            _t("deddens_wct_block"),
            _t("bt_wct", True, S="T"),
        ]

    elif spec.kind == "random_wct":
        u, w = random_wct_vectors(rng, space, part)
        g_blk = cvec(rng, part.nblocks)
        g_blk[rng.uniform(size=part.nblocks) < 0.3] = 0.0
        g = g_blk[part.labels]
        vectors.update(u=u, w=w, g=g)
        tests += [
            _t("cond_exp_axioms", True, f="u", g="w"),
            _t("wct_norm", True),
            _t("composition", True),
            _t("quasinormal"),
            _t("pinv"),
            _t("partial_isometry"),
            _t("mg_annihilation"),
            _t("power_identity", True),
        ]

    elif spec.kind == "commutant_member":
        T = normalized_operator(rng, space)
        S = polynomial_in(rng, T)
        operators.update(T=T.matrix, S=S.matrix)
        tests += [
            _t("deddens_empirical", "In"),
            _t("bt_empirical", "In"),
            _t("majorizes", True, T="T", S="S"),
        ]

    elif spec.kind == "random_operator":
        T = normalized_operator(rng, space)
        operators.update(T=T.matrix, S=cmat(rng, n))
        tests += [
            _t("spectral_radius", True),
            _t("penrose", True),
            _t("majorizes"),
            _t("douglas"),
            _t("deddens_empirical"),
            _t("bt_empirical"),
        ]

    return Scenario(
        weights=tuple(float(v) for v in space.weights),
        blocks=part.blocks,
        vectors={k: np.asarray(v, dtype=complex) for k, v in vectors.items()},
        operators={k: np.asarray(v, dtype=complex) for k, v in operators.items()},
        tests=tuple(tests),
        seed=spec.seed,
    )
