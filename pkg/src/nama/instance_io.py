"""Instance and result file formats: strict JSON-syntax text with
string-encoded rationals.

Rational mode never round-trips through binary floats: rationals are
serialized as "p/q" or decimal strings and any bare JSON float in a
rational-mode instance is rejected.  Unknown fields are rejected
everywhere so that typos fail loudly instead of being ignored.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Optional

from . import curves as cv
from . import solver as sv
from . import toric as tc
from .errors import ParseError, ValidationError
from .scalars import format_scalar, parse_scalar

FORMAT_VERSION = 1

KINDS = ("toric-dirac", "toric-envelope", "curve-poisson", "curve-green")
MODES = ("rational", "float")


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def sha256_of(obj) -> str:
    return hashlib.sha256(dumps_canonical(obj).encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------
# Scalars and points under the two modes.
# --------------------------------------------------------------------------


def _scalar(value, mode: str, field: str) -> Fraction:
    if isinstance(value, bool):
        raise ValidationError(field, f"not a number: {value!r}")
    if isinstance(value, float):
        if mode == "rational":
            raise ValidationError(
                field, "binary floats are not allowed in rational mode; use 'p/q' strings"
            )
        return Fraction(value)
    try:
        return parse_scalar(value)
    except ValueError as exc:
        raise ValidationError(field, str(exc)) from None


def _point(value, mode: str, field: str, dim: Optional[int] = None):
    if not isinstance(value, (list, tuple)):
        raise ValidationError(field, "expected a coordinate list")
    pt = tuple(_scalar(c, mode, f"{field}[{i}]") for i, c in enumerate(value))
    if dim is not None and len(pt) != dim:
        raise ValidationError(field, f"expected {dim} coordinates, got {len(pt)}")
    return pt


def _render(x: Fraction, mode: str):
    return float(x) if mode == "float" else format_scalar(x)


def _check_keys(obj, allowed, required, field: str):
    if not isinstance(obj, dict):
        raise ValidationError(field, "expected an object")
    for key in obj:
        if key not in allowed:
            raise ValidationError(f"{field}.{key}" if field else key, "unknown field")
    for key in required:
        if key not in obj:
            raise ValidationError(f"{field}.{key}" if field else key, "missing field")


# --------------------------------------------------------------------------
# Domain-object encodings (shared by instances, results, and witnesses).
# --------------------------------------------------------------------------


def encode_polytope(delta: tc.NewtonPolytope, mode: str = "rational"):
    return {"vertices": [[_render(c, mode) for c in v] for v in delta.body.vertices]}


def decode_polytope(obj, mode: str, field: str) -> tc.NewtonPolytope:
    _check_keys(obj, {"vertices"}, {"vertices"}, field)
    verts = obj["vertices"]
    if not isinstance(verts, list) or not verts:
        raise ValidationError(f"{field}.vertices", "expected a non-empty list")
    pts = [_point(v, mode, f"{field}.vertices[{i}]") for i, v in enumerate(verts)]
    dims = {len(p) for p in pts}
    if len(dims) != 1:
        raise ValidationError(f"{field}.vertices", "mixed dimensions")
    try:
        return tc.newton_polytope(pts, dims.pop())
    except Exception as exc:
        raise ValidationError(f"{field}.vertices", str(exc)) from None


def encode_generators(f: tc.ToricPsh, mode: str = "rational"):
    return [
        {"site": [_render(c, mode) for c in x], "value": _render(t, mode)}
        for x, t in f.generators
    ]


def encode_test_function(f: tc.TestFunction, mode: str = "rational"):
    return {"branches": [encode_generators(b, mode) for b in f.branches]}


def encode_measure(mu: tc.AtomicMeasure, mode: str = "rational"):
    return [
        {"point": [_render(c, mode) for c in p], "weight": _render(w, mode)}
        for p, w in mu.atoms
    ]


def encode_graph(graph: cv.MetricGraph, mode: str = "rational"):
    return {
        "vertex_count": graph.vertex_count,
        "edges": [[u, v, _render(l, mode)] for u, v, l in graph.edges],
    }


def decode_graph(obj, mode: str, field: str) -> cv.MetricGraph:
    _check_keys(obj, {"vertex_count", "edges"}, {"vertex_count", "edges"}, field)
    count = obj["vertex_count"]
    if not isinstance(count, int) or isinstance(count, bool) or count < 1:
        raise ValidationError(f"{field}.vertex_count", "expected a positive integer")
    edges = obj["edges"]
    if not isinstance(edges, list) or not edges:
        raise ValidationError(f"{field}.edges", "expected a non-empty list")
    parsed = []
    for i, e in enumerate(edges):
        if not isinstance(e, list) or len(e) != 3:
            raise ValidationError(f"{field}.edges[{i}]", "expected [u, v, length]")
        u, v, l = e
        if not isinstance(u, int) or not isinstance(v, int):
            raise ValidationError(f"{field}.edges[{i}]", "endpoints must be integers")
        parsed.append((u, v, _scalar(l, mode, f"{field}.edges[{i}].length")))
    try:
        return cv.MetricGraph(count, tuple(parsed))
    except ValueError as exc:
        raise ValidationError(f"{field}.edges", str(exc)) from None


def decode_graph_measure(obj, graph: cv.MetricGraph, mode: str, field: str) -> cv.GraphMeasure:
    if not isinstance(obj, list):
        raise ValidationError(field, "expected a list of atoms")
    vw = [Fraction(0)] * graph.vertex_count
    per_edge: Dict[int, list] = {}
    for i, atom in enumerate(obj):
        af = f"{field}[{i}]"
        if not isinstance(atom, dict):
            raise ValidationError(af, "expected an object")
        if "vertex" in atom:
            _check_keys(atom, {"vertex", "weight"}, {"vertex", "weight"}, af)
            v = atom["vertex"]
            if not isinstance(v, int) or not (0 <= v < graph.vertex_count):
                raise ValidationError(f"{af}.vertex", "vertex index out of range")
            vw[v] += _scalar(atom["weight"], mode, f"{af}.weight")
        else:
            _check_keys(atom, {"edge", "pos", "weight"}, {"edge", "pos", "weight"}, af)
            e = atom["edge"]
            if not isinstance(e, int) or not (0 <= e < len(graph.edges)):
                raise ValidationError(f"{af}.edge", "edge index out of range")
            pos = _scalar(atom["pos"], mode, f"{af}.pos")
            if not (0 < pos < 1):
                raise ValidationError(f"{af}.pos", "interior position must be in (0,1)")
            per_edge.setdefault(e, []).append((pos, _scalar(atom["weight"], mode, f"{af}.weight")))
    atoms = [tuple(sorted(per_edge.get(e, ()))) for e in range(len(graph.edges))]
    try:
        return cv.GraphMeasure.on(graph, vw, atoms)
    except ValueError as exc:
        raise ValidationError(field, str(exc)) from None


def encode_graph_measure(mu: cv.GraphMeasure, mode: str = "rational"):
    out = []
    for v, w in enumerate(mu.vertex_weights):
        if w != 0:
            out.append({"vertex": v, "weight": _render(w, mode)})
    for e, bps in enumerate(mu.edge_atoms):
        for p, w in bps:
            out.append({"edge": e, "pos": _render(p, mode), "weight": _render(w, mode)})
    return out


# --------------------------------------------------------------------------
# Instances.
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class InstanceFile:
    kind: str
    mode: str
    data: Dict[str, Any]
    solver: sv.SolverConfig
    canonical: Dict[str, Any]

    @property
    def sha256(self) -> str:
        return sha256_of(self.canonical)


_TOP_KEYS = {
    "toric-dirac": {"kind", "mode", "polytope", "sites", "weights", "solver"},
    "toric-envelope": {"kind", "mode", "polytope", "constraints", "lattice_m", "solver"},
    "curve-poisson": {"kind", "mode", "graph", "omega", "mu", "solver"},
    "curve-green": {"kind", "mode", "graph", "x", "y", "solver"},
}


def _parse_solver_block(obj, mode: str) -> sv.SolverConfig:
    if obj is None:
        return sv.SolverConfig(mode=mode)
    _check_keys(obj, {"tol", "max_iter", "damping"}, set(), "solver")
    tol = _scalar(obj["tol"], mode, "solver.tol") if "tol" in obj else None
    max_iter = obj.get("max_iter", 10_000)
    if not isinstance(max_iter, int) or max_iter < 1:
        raise ValidationError("solver.max_iter", "expected a positive integer")
    damping = (
        _scalar(obj["damping"], mode, "solver.damping")
        if "damping" in obj
        else Fraction(1, 2)
    )
    if not (0 < damping < 1):
        raise ValidationError("solver.damping", "damping must be in (0,1)")
    return sv.SolverConfig(tol=tol, max_iter=max_iter, damping=damping, mode=mode)


def parse_instance(text: str) -> InstanceFile:
    """Strict parse: unknown fields are rejected and every structural
    invariant (mass balance, distinct sites, connectivity) is validated."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(obj, dict):
        raise ParseError("top-level value must be an object")
    kind = obj.get("kind")
    if kind not in KINDS:
        raise ValidationError("kind", f"expected one of {', '.join(KINDS)}")
    mode = obj.get("mode", "rational")
    if mode not in MODES:
        raise ValidationError("mode", "expected 'rational' or 'float'")
    _check_keys(obj, _TOP_KEYS[kind], {"kind"}, "")
    solver_cfg = _parse_solver_block(obj.get("solver"), mode)
    data: Dict[str, Any] = {}

    if kind in ("toric-dirac", "toric-envelope"):
        if "polytope" not in obj:
            raise ValidationError("polytope", "missing field")
        delta = decode_polytope(obj["polytope"], mode, "polytope")
        data["delta"] = delta
        n = delta.dim
        if kind == "toric-dirac":
            for key in ("sites", "weights"):
                if key not in obj:
                    raise ValidationError(key, "missing field")
            sites = [
                _point(s, mode, f"sites[{i}]", n) for i, s in enumerate(obj["sites"])
            ]
            if len(set(sites)) != len(sites):
                raise ValidationError("sites", "sites must be distinct")
            weights = [
                _scalar(w, mode, f"weights[{i}]") for i, w in enumerate(obj["weights"])
            ]
            if len(weights) != len(sites):
                raise ValidationError("weights", "one weight per site required")
            if any(w <= 0 for w in weights):
                raise ValidationError("weights", "weights must be positive")
            if sum(weights) != delta.volume:
                raise ValidationError(
                    "weights",
                    f"total weight {sum(weights)} must equal vol(Delta) = {delta.volume}",
                )
            data["problem"] = sv.DiracProblem(delta, tuple(sites), tuple(weights))
        else:
            if "constraints" not in obj or not obj["constraints"]:
                raise ValidationError("constraints", "need at least one constraint")
            cons = []
            for i, c in enumerate(obj["constraints"]):
                cf = f"constraints[{i}]"
                _check_keys(c, {"site", "value"}, {"site", "value"}, cf)
                cons.append(
                    (_point(c["site"], mode, f"{cf}.site", n), _scalar(c["value"], mode, f"{cf}.value"))
                )
            data["constraints"] = tuple(cons)
            if "lattice_m" in obj:
                m = obj["lattice_m"]
                if not isinstance(m, int) or m < 1:
                    raise ValidationError("lattice_m", "expected a positive integer")
                data["lattice_m"] = m
    else:
        if "graph" not in obj:
            raise ValidationError("graph", "missing field")
        graph = decode_graph(obj["graph"], mode, "graph")
        data["graph"] = graph
        if kind == "curve-poisson":
            for key in ("omega", "mu"):
                if key not in obj:
                    raise ValidationError(key, "missing field")
            omega = decode_graph_measure(obj["omega"], graph, mode, "omega")
            mu = decode_graph_measure(obj["mu"], graph, mode, "mu")
            if not omega.is_positive() or omega.total_mass <= 0:
                raise ValidationError("omega", "must be a positive measure")
            if not mu.is_positive() or mu.total_mass <= 0:
                raise ValidationError("mu", "must be a positive measure")
            if omega.total_mass != mu.total_mass:
                raise ValidationError(
                    "mu", f"mass {mu.total_mass} must equal mass(omega) = {omega.total_mass}"
                )
            data["omega"], data["mu"] = omega, mu
        else:
            for key in ("x", "y"):
                if key not in obj:
                    raise ValidationError(key, "missing field")
                v = obj[key]
                if not isinstance(v, int) or not (0 <= v < graph.vertex_count):
                    raise ValidationError(key, "vertex index out of range")
            if obj["x"] == obj["y"]:
                raise ValidationError("y", "x and y must differ")
            data["x"], data["y"] = obj["x"], obj["y"]

    canonical = json.loads(dumps_canonical(obj))
    return InstanceFile(kind=kind, mode=mode, data=data, solver=solver_cfg, canonical=canonical)


def serialize_instance(inst: InstanceFile) -> str:
    return dumps_canonical(inst.canonical)


# --------------------------------------------------------------------------
# Results.
# --------------------------------------------------------------------------


def _timestamp_field(with_timestamp: bool):
    if not with_timestamp:
        return {}
    import datetime

    return {"timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat()}


def result_for_solution(
    inst: InstanceFile, solution: sv.Solution, with_timestamp: bool = True
) -> Dict[str, Any]:
    mode = inst.mode
    p = solution.problem
    payload = {
        "polytope": encode_polytope(p.delta, mode),
        "sites": [[_render(c, mode) for c in x] for x in p.sites],
        "t": [_render(t, mode) for t in solution.t],
        "generators": encode_generators(solution.potential, mode),
        "atoms": encode_measure(solution.masses, mode),
        "energy": _render(
            tc.energy(solution.potential, p.reference()), mode
        ),
        "objective": _render(Fraction(solution.objective), mode),
        "residual": _render(Fraction(solution.residual), mode),
        "iterations": solution.iterations,
    }
    return {
        "format_version": FORMAT_VERSION,
        "kind": inst.kind,
        "mode": mode,
        "instance_sha256": inst.sha256,
        "solution": payload,
        **_timestamp_field(with_timestamp),
    }


def result_for_envelope(
    inst: InstanceFile, f: tc.ToricPsh, with_timestamp: bool = True
) -> Dict[str, Any]:
    mode = inst.mode
    mu = tc.ma_measure(f)
    payload = {
        "polytope": encode_polytope(f.delta, mode),
        "generators": encode_generators(f, mode),
        "atoms": encode_measure(mu, mode),
        "energy": _render(tc.energy(f, tc.g_delta(inst.data["delta"])), mode)
        if f.delta == inst.data["delta"]
        else None,
        "total_mass": _render(mu.total_mass, mode),
    }
    if payload["energy"] is None:
        del payload["energy"]
    return {
        "format_version": FORMAT_VERSION,
        "kind": inst.kind,
        "mode": mode,
        "instance_sha256": inst.sha256,
        "solution": payload,
        **_timestamp_field(with_timestamp),
    }


def result_for_graph_function(
    inst: InstanceFile, f: cv.GraphFunction, extra=None, with_timestamp: bool = True
) -> Dict[str, Any]:
    mode = inst.mode
    payload = {
        "values": [_render(v, mode) for v in f.values],
        "breakpoints": [
            [[_render(p, mode), _render(x, mode)] for p, x in bps]
            for bps in f.breakpoints
        ],
    }
    if extra:
        payload.update(extra)
    return {
        "format_version": FORMAT_VERSION,
        "kind": inst.kind,
        "mode": mode,
        "instance_sha256": inst.sha256,
        "solution": payload,
        **_timestamp_field(with_timestamp),
    }


def revalidate_result(inst: InstanceFile, result: Dict[str, Any]) -> Fraction:
    """Rebuild the potential from the instance plus the result's t vector
    and recompute the residual; exact in rational mode."""
    if inst.kind != "toric-dirac":
        raise ValidationError("kind", "revalidation applies to toric-dirac results")
    p = inst.data["problem"]
    t = [
        _scalar(x, inst.mode, f"solution.t[{i}]")
        for i, x in enumerate(result["solution"]["t"])
    ]
    phi = tc.envelope(p.delta, list(zip(p.sites, t)))
    mu = tc.ma_measure(phi)
    return max(abs(mu.weight_at(x) - w) for x, w in zip(p.sites, p.weights))


# --------------------------------------------------------------------------
# CSV export of Laguerre cells.
# --------------------------------------------------------------------------


def export_cells(result: Dict[str, Any]) -> str:
    """One row per (cell, vertex) of the solution's Laguerre diagram,
    lexicographically ordered, with exact p/q columns in rational mode."""
    mode = result.get("mode", "rational")
    sol = result["solution"]
    delta = decode_polytope(sol["polytope"], mode, "solution.polytope")
    gens = [
        (_point(g["site"], mode, "site"), _scalar(g["value"], mode, "value"))
        for g in sol["generators"]
    ]
    f = tc.ToricPsh(delta, gens)
    mu = tc.ma_measure(f)
    n = delta.dim
    cols = ["cell_id"]
    cols += [f"site_x{k+1}" for k in range(n)]
    cols += ["weight"]
    cols += [f"vertex_x{k+1}" for k in range(n)]
    if mode == "rational":
        cols += [f"site_x{k+1}_exact" for k in range(n)]
        cols += ["weight_exact"]
        cols += [f"vertex_x{k+1}_exact" for k in range(n)]
    lines = [",".join(cols)]
    for cell_id, ((site, _), cell) in enumerate(zip(f.generators, f.cells)):
        w = mu.weight_at(site)
        for v in sorted(cell.vertices):
            row = [str(cell_id)]
            row += [repr(float(c)) for c in site]
            row += [repr(float(w))]
            row += [repr(float(c)) for c in v]
            if mode == "rational":
                row += [format_scalar(c) for c in site]
                row += [format_scalar(w)]
                row += [format_scalar(c) for c in v]
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"
