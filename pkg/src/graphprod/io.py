"""JSON input formats shared by the command-line tools.

Graph::

    {"vertices": ["a", "b", "c"], "edges": [["a", "b"]]}

Vertex algebras, one entry per graph vertex::

    {"a": {"kind": "matrix", "n": 2, "density": [[0.6, 0], [0, 0.4]]},
     "b": {"kind": "group", "cyclic": 2},
     "c": {"kind": "group", "table": [[0, 1], [1, 0]]}}

Matrix entries are plain numbers or ``[re, im]`` pairs.  A matrix entry without a
density gets the normalized trace.  A ``"*"`` entry supplies the description for every
vertex not listed explicitly.

Fusion data, one entry per vertex, in the layout of :meth:`FusionData.to_dict`.

Every structural problem is reported as :class:`ConfigError`.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import ConfigError
from .fusion import FusionData
from .vertex import GroupAlgebra, MatrixAlgebra, VertexAlgebra
from .words import FiniteGroup, SimplicialGraph

WILDCARD = "*"


def read_json(path) -> Any:
    try:
        with open(Path(path), encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def _require(d, key, kind, where):
    if not isinstance(d, Mapping) or key not in d:
        raise ConfigError(f"{where}: missing field {key!r}")
    value = d[key]
    if not isinstance(value, kind):
        raise ConfigError(f"{where}: field {key!r} has the wrong type")
    return value


def graph_from_dict(d) -> SimplicialGraph:
    vertices = _require(d, "vertices", list, "graph")
    edges = d.get("edges", []) if isinstance(d, Mapping) else None
    if not isinstance(edges, list):
        raise ConfigError("graph: field 'edges' must be an array")
    if not all(isinstance(v, str) for v in vertices):
        raise ConfigError("graph: vertex names must be strings")
    for e in edges:
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(v, str) for v in e)):
            raise ConfigError(f"graph: edge {e!r} is not a pair of vertex names")
    try:
        return SimplicialGraph(vertices, [tuple(e) for e in edges])
    except ValueError as exc:
        raise ConfigError(f"graph: {exc}") from exc


def load_graph(path) -> SimplicialGraph:
    return graph_from_dict(read_json(path))


def _scalar(x, where) -> complex:
    if isinstance(x, bool):
        raise ConfigError(f"{where}: booleans are not numbers")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(t, (int, float)) and not isinstance(t, bool)
                                                   for t in x):
        return complex(x[0], x[1])
    raise ConfigError(f"{where}: {x!r} is neither a number nor an [re, im] pair")


def complex_matrix(rows, where="matrix") -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigError(f"{where}: expected a nonempty array of rows")
    n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise ConfigError(f"{where}: rows have different lengths")
    return np.array([[_scalar(x, where) for x in r] for r in rows], dtype=complex)


def vertex_from_dict(d, where="vertex") -> VertexAlgebra:
    kind = _require(d, "kind", str, where)
    try:
        if kind == "matrix":
            n = d.get("n")
            if "density" in d:
                rho = complex_matrix(d["density"], f"{where}.density")
                if n is not None and rho.shape != (n, n):
                    raise ConfigError(f"{where}: density is not {n}x{n}")
                return MatrixAlgebra(rho)
            if not isinstance(n, int) or isinstance(n, bool) or n < 1:
                raise ConfigError(f"{where}: matrix entry needs a positive integer 'n' or a density")
            return MatrixAlgebra.tracial(n)
        if kind == "group":
            if "cyclic" in d:
                order = d["cyclic"]
                if not isinstance(order, int) or isinstance(order, bool) or order < 1:
                    raise ConfigError(f"{where}: 'cyclic' must be a positive integer")
                return GroupAlgebra(FiniteGroup.cyclic(order))
            table = _require(d, "table", list, where)
            if not all(isinstance(r, list) and all(isinstance(x, int) and not isinstance(x, bool) for x in r)
                       for r in table):
                raise ConfigError(f"{where}: group table must be an array of integer rows")
            return GroupAlgebra(FiniteGroup(table))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}: unknown kind {kind!r} (expected 'matrix' or 'group')")


def vertices_from_dict(d, graph: SimplicialGraph) -> dict:
    if not isinstance(d, Mapping):
        raise ConfigError("vertices: expected an object keyed by vertex name")
    unknown = [k for k in d if k != WILDCARD and k not in graph.vertices]
    if unknown:
        raise ConfigError(f"vertices: {unknown!r} are not vertices of the graph")
    out = {}
    for v in graph.vertices:
        spec = d.get(v, d.get(WILDCARD))
        if spec is None:
            raise ConfigError(f"vertices: no algebra given for vertex {v!r}")
        out[v] = vertex_from_dict(spec, f"vertices.{v}")
    return out


def load_vertices(path, graph: SimplicialGraph) -> dict:
    return vertices_from_dict(read_json(path), graph)


def groups_from_vertices(algebras: Mapping) -> dict:
    """The underlying finite groups; every vertex must be a group algebra."""
    bad = [v for v, a in algebras.items() if not isinstance(a, GroupAlgebra)]
    if bad:
        raise ConfigError(f"vertices {bad!r} are not group algebras")
    return {v: a.group for v, a in algebras.items()}


def fusion_from_dict(d, graph: SimplicialGraph) -> dict:
    if not isinstance(d, Mapping):
        raise ConfigError("fusion: expected an object keyed by vertex name")
    out = {}
    for v in graph.vertices:
        spec = d.get(v, d.get(WILDCARD))
        if spec is None:
            raise ConfigError(f"fusion: no fusion data for vertex {v!r}")
        try:
            out[v] = FusionData.from_dict(spec)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"fusion.{v}: {exc}") from exc
    return out


def load_fusion(path, graph: SimplicialGraph) -> dict:
    return fusion_from_dict(read_json(path), graph)
