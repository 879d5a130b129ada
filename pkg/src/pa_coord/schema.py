"""JSON instance files: parsing, validation and canonical serialization.

A file is ``{"schema_version": "1.0", "kind": ..., "payload": {...}}``. Unknown
keys and non-finite numbers are rejected. The emitter sorts keys and writes
floats with 17 significant digits so that parse/serialize round trips are
byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .applications import (
    ContractInstance,
    Graph,
    PersuasionInstance,
    SellingInfoInstance,
    StackelbergInstance,
)
from .info_acquisition import PiecewiseConvexCost
from .model import (
    AffineForm,
    ConcavePWL,
    ConvexPWL,
    DomainError,
    PAInstance,
    Polyhedron,
    ensure_valid,
)

SCHEMA_VERSION = "1.0"


class SchemaError(ValueError):
    """Malformed instance file; ``line``/``col`` are set for JSON syntax errors."""

    def __init__(self, msg, line=None, col=None):
        super().__init__(msg)
        self.line, self.col = line, col

    def __str__(self):
        msg = super().__str__()
        if self.line is not None:
            return f"line {self.line}, column {self.col}: {msg}"
        return msg


@dataclass(frozen=True)
class DecisionProblem:
    """Single decision maker: ``utility[a][state]`` and a prior over states."""

    utility: np.ndarray
    prior: np.ndarray
    actions: tuple = ()
    states: tuple = ()

    def __post_init__(self):
        u = np.atleast_2d(np.array(self.utility, dtype=float))
        f = np.array(self.prior, dtype=float)
        if u.shape[1] != f.size:
            raise DomainError("utility columns must match the prior length")
        if np.any(f < -1e-12) or abs(f.sum() - 1.0) > 1e-12:
            raise DomainError("prior is not a probability vector")
        object.__setattr__(self, "utility", u)
        object.__setattr__(self, "prior", f)
        object.__setattr__(self, "actions", tuple(self.actions) or tuple(range(u.shape[0])))
        object.__setattr__(self, "states", tuple(self.states) or tuple(range(f.size)))


# ---------------------------------------------------------------------------
# emitter


def _fmt_float(x):
    x = float(x)
    if not math.isfinite(x):
        raise SchemaError("non-finite number")
    if x == 0.0:
        return "0"  # drops the sign of -0.0
    s = format(x, ".17g")
    return s


def _emit(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(obj[k], indent, level + 1)}"
                 for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_emit(v, indent, level + 1) for v in seq) + "]"
        items = [pad + _emit(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise SchemaError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    """Canonical JSON text (sorted keys, 17 significant digits, trailing newline)."""
    return _emit(obj, indent, 0) + "\n"


# ---------------------------------------------------------------------------
# parsing helpers


def _reject_constant(name):
    raise SchemaError(f"non-finite number {name} is not allowed")


def loads(text):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise SchemaError(e.msg, e.lineno, e.colno) from None


def _keys(obj, required, optional=(), where="payload"):
    if not isinstance(obj, dict):
        raise SchemaError(f"{where} must be an object")
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise SchemaError(f"unknown field(s) in {where}: {sorted(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise SchemaError(f"missing field(s) in {where}: {missing}")


def _num_array(v, where, ndim=None):
    try:
        a = np.array(v, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(f"{where} must be numeric") from None
    if ndim is not None and a.ndim != ndim:
        raise SchemaError(f"{where} must be {ndim}-dimensional")
    if not np.all(np.isfinite(a)):
        raise SchemaError(f"{where} has non-finite entries")
    return a


def _labels(v, where):
    if not isinstance(v, list) or not all(isinstance(x, (str, int)) and not isinstance(x, bool)
                                          for x in v):
        raise SchemaError(f"{where} must be a list of strings or integers")
    return tuple(v)


def _affine(obj, where):
    _keys(obj, ("coeffs", "offset"), where=where)
    return AffineForm(_num_array(obj["coeffs"], where + ".coeffs", 1),
                      float(_num_array(obj["offset"], where + ".offset", 0)))


def _affine_out(a):
    return {"coeffs": [float(x) for x in a.coeffs], "offset": float(a.offset)}


def _poly(obj, where):
    _keys(obj, ("dim",), ("ineq", "eq"), where=where)
    d = obj["dim"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise SchemaError(f"{where}.dim must be a positive integer")
    blocks = {}
    for key in ("ineq", "eq"):
        rows, rhs = [], []
        for i, r in enumerate(obj.get(key, [])):
            _keys(r, ("row", "rhs"), where=f"{where}.{key}[{i}]")
            rows.append(_num_array(r["row"], f"{where}.{key}[{i}].row", 1))
            rhs.append(float(_num_array(r["rhs"], f"{where}.{key}[{i}].rhs", 0)))
        blocks[key] = (np.array(rows).reshape(len(rows), d) if rows else None, rhs or None)
    try:
        return Polyhedron(d, *blocks["ineq"], *blocks["eq"])
    except ValueError as e:
        raise SchemaError(f"{where}: {e}") from None


def _poly_out(P):
    out = {"dim": P.dim}
    if P.A_ub.shape[0]:
        out["ineq"] = [{"row": [float(x) for x in r], "rhs": float(b)}
                       for r, b in zip(P.A_ub, P.b_ub)]
    if P.A_eq.shape[0]:
        out["eq"] = [{"row": [float(x) for x in r], "rhs": float(b)}
                     for r, b in zip(P.A_eq, P.b_eq)]
    return out


def _matrix_out(m):
    return np.asarray(m, dtype=float).tolist()


# ---------------------------------------------------------------------------
# kinds


def _pa_in(p):
    _keys(p, ("types", "actions", "prior", "dim", "strategy_space", "principal_utility",
              "agent_utility"), ("supplemental", "name"))
    types = _labels(p["types"], "payload.types")
    actions = _labels(p["actions"], "payload.actions")
    T, A = len(types), len(actions)
    U, V = p["principal_utility"], p["agent_utility"]
    if not (isinstance(U, list) and len(U) == T and all(isinstance(r, list) and len(r) == A
                                                        for r in U)):
        raise SchemaError("payload.principal_utility must be types x actions")
    if not (isinstance(V, list) and len(V) == T and all(isinstance(r, list) and len(r) == A
                                                        for r in V)):
        raise SchemaError("payload.agent_utility must be types x actions")
    Uo = []
    for t in range(T):
        row = []
        for a in range(A):
            where = f"payload.principal_utility[{t}][{a}]"
            if not isinstance(U[t][a], list) or not U[t][a]:
                raise SchemaError(f"{where} must be a nonempty list of affine pieces")
            row.append(ConcavePWL(tuple(_affine(pc, f"{where}[{k}]")
                                        for k, pc in enumerate(U[t][a]))))
        Uo.append(row)
    Vo = [[_affine(V[t][a], f"payload.agent_utility[{t}][{a}]") for a in range(A)]
          for t in range(T)]
    C = None
    if p.get("supplemental") is not None:
        S = p["supplemental"]
        if not isinstance(S, list) or len(S) != T:
            raise SchemaError("payload.supplemental must have one entry per type")
        C = [None if s is None else _poly(s, f"payload.supplemental[{t}]")
             for t, s in enumerate(S)]
    inst = PAInstance(types, actions, _num_array(p["prior"], "payload.prior", 1), p["dim"],
                      _poly(p["strategy_space"], "payload.strategy_space"), Uo, Vo,
                      supplemental=C, name=p.get("name", ""))
    ensure_valid(inst)
    return inst


def _pa_out(inst):
    out = {
        "types": list(inst.types),
        "actions": list(inst.actions),
        "prior": [float(x) for x in inst.prior],
        "dim": inst.dim,
        "strategy_space": _poly_out(inst.strategy_space),
        "principal_utility": [[[_affine_out(pc) for pc in u.pieces] for u in row]
                              for row in inst.principal_utility],
        "agent_utility": [[_affine_out(v) for v in row] for row in inst.agent_utility],
    }
    if inst.supplemental is not None:
        out["supplemental"] = [None if c is None else _poly_out(c) for c in inst.supplemental]
    if inst.name:
        out["name"] = inst.name
    return out


def _contract_in(p):
    _keys(p, ("reward", "outcome_dist", "cost", "prior"), ("types", "actions"))
    return ContractInstance(_num_array(p["reward"], "payload.reward", 1),
                            _num_array(p["outcome_dist"], "payload.outcome_dist", 3),
                            _num_array(p["cost"], "payload.cost", 2),
                            _num_array(p["prior"], "payload.prior", 1),
                            _labels(p.get("types", []), "payload.types"),
                            _labels(p.get("actions", []), "payload.actions"))


def _contract_out(c):
    return {"reward": _matrix_out(c.reward), "outcome_dist": _matrix_out(c.outcome_dist),
            "cost": _matrix_out(c.cost), "prior": _matrix_out(c.prior),
            "types": list(c.types), "actions": list(c.actions)}


def _persuasion_in(p):
    _keys(p, ("beliefs", "type_dist", "sender", "receiver"), ("types", "actions"))
    return PersuasionInstance(_num_array(p["beliefs"], "payload.beliefs", 2),
                              _num_array(p["type_dist"], "payload.type_dist", 1),
                              _num_array(p["sender"], "payload.sender", 3),
                              _num_array(p["receiver"], "payload.receiver", 3),
                              _labels(p.get("types", []), "payload.types"),
                              _labels(p.get("actions", []), "payload.actions"))


def _persuasion_out(s):
    return {"beliefs": _matrix_out(s.beliefs), "type_dist": _matrix_out(s.type_dist),
            "sender": _matrix_out(s.sender), "receiver": _matrix_out(s.receiver),
            "types": list(s.types), "actions": list(s.actions)}


def _stackelberg_in(p):
    _keys(p, ("leader", "follower", "prior"), ("types", "actions", "leader_actions"))
    return StackelbergInstance(_num_array(p["leader"], "payload.leader", 3),
                               _num_array(p["follower"], "payload.follower", 3),
                               _num_array(p["prior"], "payload.prior", 1),
                               _labels(p.get("types", []), "payload.types"),
                               _labels(p.get("actions", []), "payload.actions"),
                               _labels(p.get("leader_actions", []), "payload.leader_actions"))


def _stackelberg_out(s):
    return {"leader": _matrix_out(s.leader), "follower": _matrix_out(s.follower),
            "prior": _matrix_out(s.prior), "types": list(s.types),
            "actions": list(s.actions), "leader_actions": list(s.leader_actions)}


def _selling_in(p):
    _keys(p, ("prior", "type_dist", "buyer"), ("types", "actions", "outside_option"))
    oo = p.get("outside_option", False)
    if not isinstance(oo, bool):
        raise SchemaError("payload.outside_option must be a boolean")
    return SellingInfoInstance(_num_array(p["prior"], "payload.prior", 1),
                               _num_array(p["type_dist"], "payload.type_dist", 1),
                               _num_array(p["buyer"], "payload.buyer", 3),
                               _labels(p.get("types", []), "payload.types"),
                               _labels(p.get("actions", []), "payload.actions"), oo)


def _selling_out(s):
    return {"prior": _matrix_out(s.prior), "type_dist": _matrix_out(s.type_dist),
            "buyer": _matrix_out(s.buyer), "types": list(s.types),
            "actions": list(s.actions), "outside_option": bool(s.outside_option)}


def _decision_in(p):
    _keys(p, ("utility", "prior"), ("actions", "states"))
    return DecisionProblem(_num_array(p["utility"], "payload.utility", 2),
                           _num_array(p["prior"], "payload.prior", 1),
                           _labels(p.get("actions", []), "payload.actions"),
                           _labels(p.get("states", []), "payload.states"))


def _decision_out(d):
    return {"utility": _matrix_out(d.utility), "prior": _matrix_out(d.prior),
            "actions": list(d.actions), "states": list(d.states)}


def _graph_in(p):
    _keys(p, ("nodes", "edges"))
    n = p["nodes"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise SchemaError("payload.nodes must be an integer")
    edges = p["edges"]
    if not isinstance(edges, list) or not all(
            isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) for v in e)
            for e in edges):
        raise SchemaError("payload.edges must be a list of [u, v] integer pairs")
    return Graph(n, tuple(tuple(e) for e in edges))


def _graph_out(g):
    return {"nodes": g.n, "edges": [list(e) for e in g.edges]}


def _pwl_cost_in(p):
    _keys(p, ("form", "pieces"))
    if p["form"] != "max":
        raise SchemaError("cost not max-of-affines")
    if not isinstance(p["pieces"], list) or not p["pieces"]:
        raise SchemaError("payload.pieces must be a nonempty list")
    return PiecewiseConvexCost(ConvexPWL(tuple(_affine(pc, f"payload.pieces[{i}]")
                                               for i, pc in enumerate(p["pieces"]))))


def _pwl_cost_out(c):
    return {"form": "max", "pieces": [_affine_out(pc) for pc in c.pwl.pieces]}


_READERS = {
    "pa": _pa_in,
    "contract": _contract_in,
    "persuasion": _persuasion_in,
    "stackelberg": _stackelberg_in,
    "selling_info": _selling_in,
    "decision": _decision_in,
    "graph": _graph_in,
    "pwl_cost": _pwl_cost_in,
}

_WRITERS = {
    PAInstance: ("pa", _pa_out),
    ContractInstance: ("contract", _contract_out),
    PersuasionInstance: ("persuasion", _persuasion_out),
    StackelbergInstance: ("stackelberg", _stackelberg_out),
    SellingInfoInstance: ("selling_info", _selling_out),
    DecisionProblem: ("decision", _decision_out),
    Graph: ("graph", _graph_out),
    PiecewiseConvexCost: ("pwl_cost", _pwl_cost_out),
}

KINDS = tuple(_READERS)


def parse_document(doc):
    """``(kind, object)`` from a decoded JSON document."""
    _keys(doc, ("schema_version", "kind", "payload"), where="document")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {doc['schema_version']!r}")
    kind = doc["kind"]
    if kind not in _READERS:
        raise SchemaError(f"unknown kind {kind!r}; expected one of {list(KINDS)}")
    try:
        return kind, _READERS[kind](doc["payload"])
    except (DomainError, ValueError) as e:
        if isinstance(e, SchemaError):
            raise
        raise SchemaError(f"invalid {kind} payload: {e}") from None


def parse_text(text):
    return parse_document(loads(text))


def load(path):
    with open(path, encoding="utf-8") as fh:
        return parse_text(fh.read())


def to_document(obj):
    for cls, (kind, writer) in _WRITERS.items():
        if isinstance(obj, cls):
            return {"schema_version": SCHEMA_VERSION, "kind": kind, "payload": writer(obj)}
    raise SchemaError(f"no schema for {type(obj).__name__}")


def serialize(obj):
    return dumps(to_document(obj))
