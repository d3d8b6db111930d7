"""Approximate float-only polytope operations in ambient dimension 3.

This is the optional companion to the exact 1-D/2-D kernel: hulls,
volumes, clipping and Minkowski sums through Qhull, with no exactness
guarantees.  Dimensions other than 3 belong to the exact kernel;
dimensions >= 4 are rejected everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection

from .errors import DimensionUnsupported, EmptyInput


@dataclass(frozen=True)
class ApproxPolytope:
    vertices: Tuple[Tuple[float, float, float], ...]
    volume: float
    # (a, b) rows meaning <a, x> <= b
    facets: Tuple[Tuple[Tuple[float, float, float], float], ...]

    @property
    def is_empty(self) -> bool:
        return not self.vertices


_EMPTY = ApproxPolytope((), 0.0, ())


def _check_dim3(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise DimensionUnsupported("approximate mode supports dimension 3 only")
    return arr


def hull3(points) -> ApproxPolytope:
    """Approximate convex hull of 3-D float points."""
    arr = _check_dim3(points)
    if arr.shape[0] == 0:
        raise EmptyInput("hull of zero points")
    try:
        h = ConvexHull(arr)
    except Exception:
        return ApproxPolytope(tuple(map(tuple, arr[:1])), 0.0, ())
    verts = tuple(tuple(arr[i]) for i in sorted(h.vertices.tolist()))
    facets = tuple(
        ((eq[0], eq[1], eq[2]), -eq[3]) for eq in h.equations.tolist()
    )
    return ApproxPolytope(verts, float(h.volume), facets)


def clip3(p: ApproxPolytope, halfspaces) -> ApproxPolytope:
    """Approximate intersection with half-spaces {<a,x> <= b}."""
    if p.is_empty:
        return p
    rows = [(*a, -b) for a, b in p.facets]
    rows += [(*a, -float(b)) for a, b in halfspaces]
    A = np.asarray([r[:3] for r in rows], dtype=float)
    b = -np.asarray([r[3] for r in rows], dtype=float)
    # Chebyshev center: a strictly interior point, if one exists.
    norms = np.linalg.norm(A, axis=1, keepdims=True)
    res = linprog(
        c=[0, 0, 0, -1],
        A_ub=np.hstack([A, norms]),
        b_ub=b,
        bounds=[(None, None)] * 3 + [(0, None)],
        method="highs",
    )
    if not res.success or res.x[3] < 1e-12:
        return _EMPTY
    interior = res.x[:3]
    hs = HalfspaceIntersection(np.asarray(rows, dtype=float), interior)
    return hull3(hs.intersections)


def minkowski3(p: ApproxPolytope, q: ApproxPolytope) -> ApproxPolytope:
    if p.is_empty or q.is_empty:
        return _EMPTY
    pts = [np.add(u, v) for u in p.vertices for v in q.vertices]
    return hull3(pts)
