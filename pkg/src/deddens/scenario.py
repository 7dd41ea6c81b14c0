"""Declarative JSON scenarios, their execution, and stable reports.

A scenario document looks like::

    {
      "weights": [1, 1],
      "blocks": [[1, 2]],
      "vectors": {"u": [[1, 0], [1, 0]], "w": [[1, 0], [1, 0]]},
      "operators": {"S": [[[0, 0], [1, 0]], [[0, 0], [0, 0]]]},
      "tests": [{"kind": "quasi_isometry", "args": {"n": 2}, "expect": true}],
      "tolerances": {"residual_tol": 1e-9},
      "seed": 0
    }

Complex numbers are ``[re, im]`` pairs (plain reals are accepted too), atom
indices in ``blocks`` are 1-based, matrices are row-major.  Test arguments
map a role (``S``, ``x``, ...) to the name of a vector or operator; a role
left out defaults to the object of the same name.  ``T`` defaults to the WCT
operator built from ``u``, ``w`` and the partition, and ``I`` is always the
identity.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from . import algebras as alg
from . import condexp as ce
from . import hilbert as hb
from .errors import (
    ConsistencyFailure,
    DeddensError,
    ParseError,
    ScenarioError,
    TruncationFailure,
    ValidationError,
)
from .hilbert import MeasureSpace, Operator, ToleranceConfig

__all__ = [
    "Scenario",
    "TestRecord",
    "Report",
    "TEST_KINDS",
    "parse_scenario",
    "run_scenario",
    "emit_report",
    "dumps_stable",
    "scenario_digest",
]

_TOL_FIELDS = {
    "rank_tol": float,
    "residual_tol": float,
    "growth_slope_tol": float,
    "series_term_tol": float,
    "max_power": int,
    "max_index": int,
}


# ---------------------------------------------------------------------------
# stable JSON
# ---------------------------------------------------------------------------

def _float_token(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    # keep floats recognizable as floats, and keep the sign of -0.0
    if s.lstrip("-").isdigit():
        s += ".0"
    return s


def _encode(obj, indent, level):
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = ": " if indent else ":"
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float_token(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [json.dumps(str(k), ensure_ascii=False) + sep + _encode(obj[k], indent, level + 1)
                 for k in sorted(obj, key=str)]
        return "{" + pad + ("," + pad).join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [_encode(v, indent, level + 1) for v in obj]
        return "[" + pad + ("," + pad).join(items) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_stable(obj, indent=2):
    """JSON with sorted keys, 17 significant digits, and inf/nan as strings."""
    return _encode(obj, indent, 0) + "\n"


def _num(v):
    if isinstance(v, str) and v in ("inf", "-inf", "nan"):
        return float(v)
    return v


def _cpairs(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in a]
    return [_cpairs(row) for row in a]


# ---------------------------------------------------------------------------
# scenario model and parsing
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Scenario:
    weights: tuple
    blocks: tuple
    vectors: dict = field(default_factory=dict)
    operators: dict = field(default_factory=dict)
    tests: tuple = ()
    tolerances: ToleranceConfig = hb.DEFAULT_TOL
    seed: int = 0

    @property
    def dim(self):
        return len(self.weights)

    def space(self):
        return MeasureSpace(np.array(self.weights, dtype=float))

    def partition(self, space=None):
        return ce.Partition(tuple(tuple(b) for b in self.blocks), space or self.space())

    def to_dict(self):
        """JSON-ready form (1-based blocks, complex pairs)."""
        return {
            "weights": [float(x) for x in self.weights],
            "blocks": [[i + 1 for i in b] for b in self.blocks],
            "vectors": {k: _cpairs(v) for k, v in self.vectors.items()},
            "operators": {k: _cpairs(v) for k, v in self.operators.items()},
            "tests": [dict(t) for t in self.tests],
            "tolerances": self.tolerances.as_dict(),
            "seed": int(self.seed),
        }

    def to_json(self):
        return dumps_stable(self.to_dict())

    def with_tolerances(self, **overrides):
        return replace(self, tolerances=replace(self.tolerances, **overrides))


def scenario_digest(s):
    return hashlib.sha256(dumps_stable(s.to_dict(), indent=0).encode()).hexdigest()


def _complex(x, path):
    if isinstance(x, bool):
        raise ParseError("expected a number or [re, im] pair", path)
    if isinstance(x, (int, float)):
        return complex(x, 0.0)
    if isinstance(x, list) and len(x) == 2 and all(
        isinstance(p, (int, float)) and not isinstance(p, bool) for p in x
    ):
        z = complex(x[0], x[1])
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ValidationError("entries must be finite", path)
        return z
    raise ParseError("expected a number or [re, im] pair", path)


def _vector(x, path):
    if not isinstance(x, list):
        raise ParseError("expected an array", path)
    return np.array([_complex(v, f"{path}[{i}]") for i, v in enumerate(x)], dtype=complex)


def _matrix(x, path):
    if not isinstance(x, list) or not x:
        raise ParseError("expected a non-empty array of rows", path)
    rows = [_vector(r, f"{path}[{i}]") for i, r in enumerate(x)]
    if len({len(r) for r in rows}) != 1:
        raise ValidationError("rows have different lengths", path)
    return np.vstack(rows)


def _mapping(doc, key):
    val = doc.get(key, {})
    if not isinstance(val, dict):
        raise ParseError("expected an object", f"$.{key}")
    return val


def parse_scenario(text):
    """Parse and validate a scenario document (a JSON string or a dict)."""
    if isinstance(text, (str, bytes)):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg} at line {exc.lineno} column {exc.colno})") from exc
    else:
        doc = text
    if not isinstance(doc, dict):
        raise ParseError("scenario must be a JSON object")

    if "weights" not in doc:
        raise ParseError("missing required field", "$.weights")
    raw_w = doc["weights"]
    if not isinstance(raw_w, list) or not raw_w:
        raise ParseError("expected a non-empty array", "$.weights")
    weights = []
    for i, v in enumerate(raw_w):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError("expected a number", f"$.weights[{i}]")
        if not (math.isfinite(v) and v > 0):
            raise ValidationError("atom masses must be finite and positive", f"$.weights[{i}]")
        weights.append(float(v))
    n = len(weights)

    raw_b = doc.get("blocks", [list(range(1, n + 1))])
    if not isinstance(raw_b, list) or not raw_b:
        raise ParseError("expected a non-empty array of blocks", "$.blocks")
    blocks, seen = [], set()
    for k, b in enumerate(raw_b):
        if not isinstance(b, list) or not b:
            raise ValidationError("blocks must be non-empty arrays", f"$.blocks[{k}]")
        block = []
        for j, i in enumerate(b):
            if isinstance(i, bool) or not isinstance(i, int):
                raise ParseError("expected an integer atom index", f"$.blocks[{k}][{j}]")
            if not 1 <= i <= n:
                raise ValidationError(f"atom index {i} outside 1..{n}", f"$.blocks[{k}][{j}]")
            if i - 1 in seen:
                raise ValidationError(f"atom {i} appears in more than one block", f"$.blocks[{k}]")
            seen.add(i - 1)
            block.append(i - 1)
        blocks.append(tuple(block))
    if len(seen) != n:
        missing = sorted(set(range(n)) - seen)
        raise ValidationError(f"atoms {[m + 1 for m in missing]} are in no block", "$.blocks")

    vectors = {}
    for name, v in _mapping(doc, "vectors").items():
        arr = _vector(v, f"$.vectors.{name}")
        if arr.size != n:
            raise ValidationError(f"length {arr.size}, expected {n}", f"$.vectors.{name}")
        vectors[name] = arr
    operators = {}
    for name, m in _mapping(doc, "operators").items():
        arr = _matrix(m, f"$.operators.{name}")
        if arr.shape != (n, n):
            raise ValidationError(f"shape {arr.shape}, expected ({n}, {n})", f"$.operators.{name}")
        operators[name] = arr

    tol_doc = _mapping(doc, "tolerances")
    overrides = {}
    for key, val in tol_doc.items():
        if key not in _TOL_FIELDS:
            raise ValidationError("unknown tolerance", f"$.tolerances.{key}")
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ParseError("expected a number", f"$.tolerances.{key}")
        overrides[key] = _TOL_FIELDS[key](val)
    try:
        tol = replace(hb.DEFAULT_TOL, **overrides)
    except ValueError as exc:
        raise ValidationError(str(exc), "$.tolerances") from exc

    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ValidationError("seed must be an unsigned 64-bit integer", "$.seed")

    raw_t = doc.get("tests", [])
    if not isinstance(raw_t, list):
        raise ParseError("expected an array", "$.tests")
    tests = []
    for i, t in enumerate(raw_t):
        path = f"$.tests[{i}]"
        if not isinstance(t, dict) or not isinstance(t.get("kind"), str):
            raise ParseError("each test needs a string 'kind'", path)
        kind = t["kind"]
        if kind not in TEST_KINDS:
            raise ValidationError(f"unknown test kind {kind!r}", f"{path}.kind")
        args = t.get("args", {})
        if not isinstance(args, dict):
            raise ParseError("expected an object", f"{path}.args")
        entry = {"kind": kind, "args": dict(args)}
        if "expect" in t:
            entry["expect"] = t["expect"]
        _check_refs(TEST_KINDS[kind], entry["args"], vectors, operators, f"{path}.args")
        tests.append(entry)

    return Scenario(tuple(weights), tuple(blocks), vectors, operators, tuple(tests), tol, int(seed))


# ---------------------------------------------------------------------------
# test registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Kind:
    handler: object
    vectors: tuple = ()
    operators: tuple = ()
    optional: tuple = ()
    params: tuple = ()
    wct: bool = False


def _check_refs(spec, args, vectors, operators, path):
    for role in args:
        if role not in spec.vectors + spec.operators + spec.params:
            raise ValidationError(f"unexpected argument {role!r}", f"{path}.{role}")
    for role in spec.params:
        if role in args and (isinstance(args[role], bool) or not isinstance(args[role], int)):
            raise ValidationError("expected an integer", f"{path}.{role}")
    has_wct = "u" in vectors and "w" in vectors
    if spec.wct and not has_wct:
        raise ValidationError("this test needs vectors 'u' and 'w'", path)
    for role in spec.vectors:
        name = args.get(role, role)
        if not isinstance(name, str):
            raise ValidationError("expected a vector name", f"{path}.{role}")
        if name not in vectors and role not in spec.optional:
            raise ValidationError(f"vector {name!r} is not defined", f"{path}.{role}")
    for role in spec.operators:
        name = args.get(role, role)
        if not isinstance(name, str):
            raise ValidationError("expected an operator name", f"{path}.{role}")
        builtin = name == "I" or (name == "T" and has_wct)
        if name not in operators and not builtin and role not in spec.optional:
            raise ValidationError(f"operator {name!r} is not defined", f"{path}.{role}")


class _Context:
    def __init__(self, scenario):
        self.sc = scenario
        self.tol = scenario.tolerances
        self.space = scenario.space()
        self.partition = scenario.partition(self.space)
        self._wct = None

    @property
    def wct(self):
        if self._wct is None:
            v = self.sc.vectors
            self._wct = ce.wct(self.space, self.partition, v["u"], v["w"], self.tol)
        return self._wct

    def vec(self, args, role):
        name = args.get(role, role)
        return self.sc.vectors.get(name)

    def op(self, args, role):
        name = args.get(role, role)
        if name in self.sc.operators:
            return Operator(self.sc.operators[name], self.space)
        if name == "I":
            return hb.identity(self.space)
        if name == "T" and "u" in self.sc.vectors and "w" in self.sc.vectors:
            return self.wct.matrix
        return None


@dataclass
class TestRecord:
    index: int
    kind: str
    args: dict = field(default_factory=dict)
    outcome: object = None
    expected: object = None
    constants: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    profiles: dict = field(default_factory=dict)
    vectors: dict = field(default_factory=dict)
    consistency_failures: list = field(default_factory=list)
    error: str | None = None

    def to_dict(self):
        return {
            "index": self.index,
            "kind": self.kind,
            "args": dict(self.args),
            "outcome": self.outcome,
            "expected": self.expected,
            "constants": dict(self.constants),
            "residuals": dict(self.residuals),
            "profiles": {k: dict(v) for k, v in self.profiles.items()},
            "vectors": dict(self.vectors),
            "consistency_failures": [dict(c) for c in self.consistency_failures],
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d):
        profiles = {}
        for k, p in d.get("profiles", {}).items():
            p = dict(p)
            p["values"] = [_num(v) for v in p.get("values", [])]
            p["fitted_slope"] = _num(p.get("fitted_slope", 0.0))
            profiles[k] = p
        return cls(
            index=d["index"],
            kind=d["kind"],
            args=dict(d.get("args", {})),
            outcome=d.get("outcome"),
            expected=d.get("expected"),
            constants={k: _num(v) for k, v in d.get("constants", {}).items()},
            residuals={k: _num(v) for k, v in d.get("residuals", {}).items()},
            profiles=profiles,
            vectors=dict(d.get("vectors", {})),
            consistency_failures=[dict(c) for c in d.get("consistency_failures", [])],
            error=d.get("error"),
        )


@dataclass
class Report:
    scenario_digest: str
    version: str
    tolerances: dict
    records: list = field(default_factory=list)
    wall_time: float | None = None

    @property
    def consistency_failures(self):
        return sum(len(r.consistency_failures) for r in self.records)

    def to_dict(self, include_time=False):
        d = {
            "scenario_digest": self.scenario_digest,
            "version": self.version,
            "tolerances": dict(self.tolerances),
            "records": [r.to_dict() for r in self.records],
            "consistency_failure_count": self.consistency_failures,
        }
        if include_time and self.wall_time is not None:
            d["wall_time"] = self.wall_time
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            scenario_digest=d["scenario_digest"],
            version=d["version"],
            tolerances={k: _num(v) for k, v in d["tolerances"].items()},
            records=[TestRecord.from_dict(r) for r in d.get("records", [])],
            wall_time=d.get("wall_time"),
        )


def _verdict_into(rec, name, v):
    rec.outcome = v.state
    rec.constants[f"{name}_constant"] = v.constant
    rec.profiles[name] = v.profile.as_dict()
    rec.constants["reason"] = v.reason


# The handlers below fill one TestRecord each.  They may raise
# ConsistencyFailure (recorded) or TruncationFailure (recorded as an error);
# any other DeddensError is structural and aborts the run.

def _t_spectral_radius(ctx, a, rec):
    T = ctx.op(a, "T")
    r = hb.spectral_radius(T, ctx.tol)
    ev = float(np.max(np.abs(np.linalg.eigvals(hb.to_ortho(T))))) if T.dim else 0.0
    rec.constants.update(spectral_radius=r, eigenvalue_modulus=ev)
    rec.residuals["relative_gap"] = abs(r - ev) / max(ev, 1e-300) if ev > 0 else r
    rec.outcome = r <= hb.operator_norm(T) + ctx.tol.residual_tol


def _t_majorizes(ctx, a, rec):
    m = hb.majorizes(ctx.op(a, "T"), ctx.op(a, "S"), ctx.tol)
    rec.outcome = m.holds
    rec.constants["constant"] = m.constant
    rec.residuals["kernel_residual"] = m.kernel_residual
    if m.violating_direction is not None:
        rec.vectors["witness"] = _cpairs(m.violating_direction)


def _t_douglas(ctx, a, rec):
    d = hb.douglas_equivalences(ctx.op(a, "T"), ctx.op(a, "S"), ctx.tol)
    rec.outcome = d.range_inclusion
    rec.constants.update(
        range_inclusion=d.range_inclusion,
        adjoint_majorization=d.adjoint_majorization,
        factorization=d.factorization,
    )
    rec.residuals["factor_residual"] = d.factor_residual


def _t_penrose(ctx, a, rec):
    T = ctx.op(a, "T")
    P = hb.pinv(T, ctx.tol)
    n = lambda X: hb.operator_norm(X)  # noqa: E731
    scale = max(1.0, n(T), n(P))
    res = {
        "TPT": n(T @ P @ T - T) / scale,
        "PTP": n(P @ T @ P - P) / scale,
        "TP_selfadjoint": n(T @ P - hb.adjoint(T @ P)) / scale,
        "PT_selfadjoint": n(P @ T - hb.adjoint(P @ T)) / scale,
    }
    rec.residuals.update(res)
    rec.outcome = max(res.values()) <= ctx.tol.residual_tol


def _t_cond_exp_axioms(ctx, a, rec):
    part, sp = ctx.partition, ctx.space
    f = ctx.vec(a, "f")
    g = ctx.vec(a, "g")
    rng = np.random.default_rng(ctx.sc.seed)
    if f is None:
        f = rng.standard_normal(sp.dim) + 1j * rng.standard_normal(sp.dim)
    if g is None:
        g = rng.standard_normal(sp.dim) + 1j * rng.standard_normal(sp.dim)
    res = ce.cond_exp_residuals(part, f, g)
    rec.residuals.update(res)
    rec.outcome = max(res.values()) <= ctx.tol.residual_tol


def _t_wct_norm(ctx, a, rec):
    W = ctx.wct
    closed = ce.wct_norm(W, ctx.tol, check=False)
    svd = hb.operator_norm(W.matrix)
    rec.constants.update(closed_form=closed, svd=svd)
    rec.residuals["relative_gap"] = abs(closed - svd) / max(1.0, svd)
    rec.outcome = rec.residuals["relative_gap"] <= ctx.tol.residual_tol
    ce.wct_norm(W, ctx.tol, check=True)


def _t_composition(ctx, a, rec):
    res = ce.composition_residuals(ctx.wct, max_n=a.get("n", 5))
    rec.residuals.update(res)
    rec.outcome = max(res.values()) <= ctx.tol.residual_tol


def _t_quasinormal(ctx, a, rec):
    q = ce.quasinormal_test(ctx.wct, ctx.tol)
    rec.outcome = q.is_quasinormal
    rec.residuals.update(matrix=q.matrix_residual, closed_form=q.closed_residual)
    if q.v is not None:
        rec.vectors["v"] = _cpairs(q.v)


def _t_quasi_isometry(ctx, a, rec):
    W = ctx.wct
    n = a.get("n", 1)
    verdicts = {}
    for k in sorted({n, 1, 2, 3}):
        mres, cres = ce.quasi_isometry_residuals(W, k)
        rec.residuals[f"matrix_n{k}"] = mres
        rec.residuals["closed_form"] = cres
        verdicts[k] = ce.quasi_isometry_test(W, k, ctx.tol)
    rec.outcome = verdicts[n]
    if len(set(verdicts.values())) > 1:
        raise ConsistencyFailure("quasi_isometry_n_independence", {f"n={k}": v for k, v in verdicts.items()})
    for k in range(1, 6):
        rec.residuals[f"power_{k}"] = ce.power_identity_residual(W, k)


def _t_pinv(ctx, a, rec):
    W = ctx.wct
    closed = ce.wct_pinv(W, ctx.tol, check=False)
    svd = hb.pinv(W.matrix, ctx.tol)
    rec.residuals["svd_gap"] = hb.operator_norm(closed - svd) / max(1.0, hb.operator_norm(svd))
    ce.wct_pinv(W, ctx.tol, check=True)
    rec.outcome = ce.pinv_equals_adjoint(W, ctx.tol)


def _t_partial_isometry(ctx, a, rec):
    rec.outcome = ce.partial_isometry_test(ctx.wct, ctx.tol)


def _t_mg_annihilation(ctx, a, rec):
    rec.outcome = ce.mg_annihilation_test(ctx.vec(a, "g"), ctx.wct, ctx.tol)


def _t_power_identity(ctx, a, rec):
    n = a.get("n", 5)
    for k in range(1, n + 1):
        rec.residuals[f"power_{k}"] = ce.power_identity_residual(ctx.wct, k)
    rec.outcome = max(rec.residuals.values()) <= ctx.tol.residual_tol


def _t_block_decomposition(ctx, a, rec):
    bd = ce.block_decomposition(ctx.wct, ctx.tol)
    P = bd.P
    rec.constants["rank_P"] = len(bd.h1_basis)
    rec.residuals["idempotent"] = hb.operator_norm(P @ P - P)
    rec.residuals["selfadjoint"] = hb.operator_norm(P - hb.adjoint(P))
    rec.outcome = True


def _t_deddens_empirical(ctx, a, rec):
    _verdict_into(rec, "c_n", alg.deddens_empirical(ctx.op(a, "T"), ctx.op(a, "S"), ctx.tol))


def _t_bt_empirical(ctx, a, rec):
    _verdict_into(rec, "beta_m", alg.bt_empirical(ctx.op(a, "T"), ctx.op(a, "S"), ctx.tol))


def _t_deddens_rank_one(ctx, a, rec):
    S = ctx.op(a, "S")
    rec.outcome = alg.deddens_rank_one(ctx.vec(a, "x"), ctx.vec(a, "y"), S, ctx.tol)
    rec.residuals["span"] = alg.span_residual(ctx.space, hb.adjoint(S) @ ctx.vec(a, "y"), ctx.vec(a, "y"))


def _t_bt_rank_one(ctx, a, rec):
    S = ctx.op(a, "S")
    rec.outcome = alg.bt_rank_one(ctx.vec(a, "y"), S, ctx.tol)
    rec.residuals["span"] = alg.span_residual(ctx.space, hb.adjoint(S) @ ctx.vec(a, "y"), ctx.vec(a, "y"))


def _t_deddens_similar_rank_one(ctx, a, rec):
    rec.outcome = alg.deddens_similar_rank_one(
        ctx.op(a, "A"), ctx.vec(a, "x"), ctx.vec(a, "y"), ctx.op(a, "S"), ctx.tol
    )


def _t_rank_one_factor(ctx, a, rec):
    h = alg.rank_one_factor(ctx.op(a, "T"), ctx.vec(a, "y"), ctx.tol)
    rec.vectors["h"] = _cpairs(h)
    rec.outcome = True


def _t_similarity_transport(ctx, a, rec):
    tr = alg.similarity_transport(ctx.op(a, "A"), ctx.op(a, "T"), ctx.op(a, "S"), ctx.tol)
    for k, r in enumerate(tr.power_residuals, start=1):
        rec.residuals[f"power_{k}"] = r
    rec.constants.update(
        D_T=tr.deddens[0].state, D_C=tr.deddens[1].state, B_T=tr.bt[0].state, B_C=tr.bt[1].state
    )
    rec.outcome = tr.agree


def _t_deddens_quasi_isometry(ctx, a, rec):
    rec.outcome = alg.deddens_quasi_isometry(ctx.op(a, "T"), ctx.op(a, "S"), ctx.tol)


def _t_bt_quasi_isometry(ctx, a, rec):
    _verdict_into(rec, "M_m", alg.bt_quasi_isometry(ctx.op(a, "T"), ctx.op(a, "S"), ctx.tol))


def _t_deddens_multiplication(ctx, a, rec):
    S = ctx.op(a, "S")
    phi = ctx.vec(a, "phi")
    rec.outcome = alg.deddens_multiplication(phi, S, ctx.tol)
    rec.constants["pattern_violations"] = len(alg.multiplication_pattern(phi, S, ctx.tol))


def _t_deddens_wct_block(ctx, a, rec):
    rec.outcome = alg.deddens_wct_block(ctx.wct, ctx.vec(a, "a"), ctx.op(a, "S"), ctx.tol)


def _t_bt_wct(ctx, a, rec):
    rec.outcome = alg.bt_wct(ctx.wct, ctx.op(a, "S"), ctx.tol)


def _t_bt_wct_peripheral(ctx, a, rec):
    rec.outcome = alg.bt_wct_peripheral(ctx.wct, ctx.vec(a, "a"), ctx.op(a, "S"), ctx.tol)


TEST_KINDS = {
    "spectral_radius": _Kind(_t_spectral_radius, operators=("T",)),
    "majorizes": _Kind(_t_majorizes, operators=("T", "S")),
    "douglas": _Kind(_t_douglas, operators=("T", "S")),
    "penrose": _Kind(_t_penrose, operators=("T",)),
    "cond_exp_axioms": _Kind(_t_cond_exp_axioms, vectors=("f", "g"), optional=("f", "g")),
    "wct_norm": _Kind(_t_wct_norm, wct=True),
    "composition": _Kind(_t_composition, params=("n",), wct=True),
    "quasinormal": _Kind(_t_quasinormal, wct=True),
    "quasi_isometry": _Kind(_t_quasi_isometry, params=("n",), wct=True),
    "pinv": _Kind(_t_pinv, wct=True),
    "partial_isometry": _Kind(_t_partial_isometry, wct=True),
    "mg_annihilation": _Kind(_t_mg_annihilation, vectors=("g",), wct=True),
    "power_identity": _Kind(_t_power_identity, params=("n",), wct=True),
    "block_decomposition": _Kind(_t_block_decomposition, wct=True),
    "deddens_empirical": _Kind(_t_deddens_empirical, operators=("T", "S")),
    "bt_empirical": _Kind(_t_bt_empirical, operators=("T", "S")),
    "deddens_rank_one": _Kind(_t_deddens_rank_one, vectors=("x", "y"), operators=("S",)),
    "bt_rank_one": _Kind(_t_bt_rank_one, vectors=("y",), operators=("S",)),
    "deddens_similar_rank_one": _Kind(
        _t_deddens_similar_rank_one, vectors=("x", "y"), operators=("A", "S")
    ),
    "rank_one_factor": _Kind(_t_rank_one_factor, vectors=("y",), operators=("T",)),
    "similarity_transport": _Kind(_t_similarity_transport, operators=("A", "T", "S")),
    "deddens_quasi_isometry": _Kind(_t_deddens_quasi_isometry, operators=("T", "S")),
    "bt_quasi_isometry": _Kind(_t_bt_quasi_isometry, operators=("T", "S")),
    "deddens_multiplication": _Kind(_t_deddens_multiplication, vectors=("phi",), operators=("S",)),
    "deddens_wct_block": _Kind(
        _t_deddens_wct_block, vectors=("a",), operators=("S",), optional=("a",), wct=True
    ),
    "bt_wct": _Kind(_t_bt_wct, operators=("S",), wct=True),
    "bt_wct_peripheral": _Kind(
        _t_bt_wct_peripheral, vectors=("a",), operators=("S",), optional=("a",), wct=True
    ),
}


def _failure_dict(exc):
    return {"check": exc.check, "verdicts": {k: _plain(v) for k, v in exc.verdicts.items()},
            "detail": exc.detail}


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return str(v) if not isinstance(v, str) else v


def run_scenario(s):
    """Run every test of ``s`` in order and collect a Report.

    Mathematical negatives and consistency failures are recorded; structural
    errors abort with :class:`ScenarioError` naming the failing test.
    """
    ctx = _Context(s)
    report = Report(scenario_digest(s), __version__, s.tolerances.as_dict())
    for i, t in enumerate(s.tests):
        kind = t["kind"]
        rec = TestRecord(index=i, kind=kind, args=dict(t.get("args", {})), expected=t.get("expect"))
        try:
            TEST_KINDS[kind].handler(ctx, rec.args, rec)
        except ConsistencyFailure as exc:
            rec.consistency_failures.append(_failure_dict(exc))
        except TruncationFailure as exc:
            rec.outcome = alg.INCONCLUSIVE
            rec.error = str(exc)
        except DeddensError as exc:
            raise ScenarioError(i, kind, exc) from exc
        if isinstance(rec.outcome, np.bool_):
            rec.outcome = bool(rec.outcome)
        if "expect" in t and not rec.consistency_failures and rec.outcome != t["expect"]:
            rec.consistency_failures.append({
                "check": "expectation",
                "verdicts": {"expected": _plain(t["expect"]), "observed": _plain(rec.outcome)},
                "detail": "",
            })
        report.records.append(rec)
    return report


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return "-" if v is None else str(v)


def emit_report(report, fmt="json"):
    """Render ``report`` as stable JSON or as a plain text table."""
    if fmt == "json":
        return dumps_stable(report.to_dict())
    if fmt != "table":
        raise ValueError(f"unknown format {fmt!r}")
    header = f"{'#':>3}  {'kind':<26} {'outcome':<13} {'expected':<9} {'max residual':>13}  failures"
    lines = [header, "-" * len(header)]
    for r in report.records:
        res = [v for v in r.residuals.values() if isinstance(v, (int, float))]
        worst = _fmt(max(res)) if res else "-"
        fails = ",".join(c["check"] for c in r.consistency_failures) or ("error" if r.error else "")
        lines.append(
            f"{r.index:>3}  {r.kind:<26} {_fmt(r.outcome):<13} {_fmt(r.expected):<9} {worst:>13}  {fails}"
        )
    return "\n".join(lines) + "\n"
