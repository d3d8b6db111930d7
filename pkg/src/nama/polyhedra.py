"""Exact rational convex geometry in ambient dimension 1 and 2.

Everything here is computed over `fractions.Fraction` with no rounding:
hulls, half-space clipping, volumes, centroids, Minkowski sums and lower
convex hulls of lifted point sets.  Empty and lower-dimensional polytopes
are ordinary values (volume 0), because cells routinely degenerate while
a solver walks through potential space.

An approximate float-only mode for ambient dimension 3 lives in
`nama.approx`; dimensions >= 4 are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence, Tuple

from .errors import (
    ConsistencyError,
    DegenerateSpan,
    DimensionMismatch,
    DimensionUnsupported,
    EmptyInput,
)

Point = Tuple[Fraction, ...]
Halfspace = Tuple[Point, Fraction]  # (a, b) encodes {m : <a, m> <= b}

_ZERO = Fraction(0)


def _aspoint(p) -> Point:
    return tuple(Fraction(c) for c in p)


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    if len(a) == 2:
        return a[0] * b[0] + a[1] * b[1]
    if len(a) == 1:
        return a[0] * b[0]
    return sum((x * y for x, y in zip(a, b)), _ZERO)


def sub(a: Point, b: Point) -> Point:
    return tuple(x - y for x, y in zip(a, b))


def add(a: Point, b: Point) -> Point:
    return tuple(x + y for x, y in zip(a, b))


def scale_point(a: Point, s: Fraction) -> Point:
    return tuple(Fraction(s) * x for x in a)


def cross(a: Point, b: Point) -> Fraction:
    return a[0] * b[1] - a[1] * b[0]


def _primitive(a: Point) -> Point:
    """Scale a rational vector to a primitive integer vector, same direction."""
    den = 1
    for c in a:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in a]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g == 0:
        return tuple(Fraction(0) for _ in a)
    return tuple(Fraction(v // g) for v in ints)


@dataclass(frozen=True)
class Polytope:
    """A rational polytope given by its irredundant vertex list.

    vertices are stored canonically: sorted for dim <= 1, counterclockwise
    from the lexicographic minimum for polygons.  `affine_dim` is -1 for
    the empty polytope.  `facets` is a consistent half-space description
    (for lower-dimensional polytopes it includes both sides of the
    carrier line plus end caps, so the inequalities still cut out the set
    exactly).
    """

    dim: int
    vertices: Tuple[Point, ...]
    affine_dim: int
    facets: Tuple[Halfspace, ...]

    @property
    def is_empty(self) -> bool:
        return self.affine_dim < 0

    @property
    def is_full_dimensional(self) -> bool:
        return self.affine_dim == self.dim

    def contains(self, p: Point) -> bool:
        if self.is_empty:
            return False
        return all(dot(a, p) <= b for a, b in self.facets)

    def translate(self, v: Point) -> "Polytope":
        if self.is_empty:
            return self
        return hull([add(q, v) for q in self.vertices], self.dim)

    def scaled(self, s: Fraction) -> "Polytope":
        if self.is_empty:
            return self
        s = Fraction(s)
        if s == 0:
            return hull([tuple(_ZERO for _ in range(self.dim))], self.dim)
        return hull([scale_point(q, s) for q in self.vertices], self.dim)


def _empty(dim: int) -> Polytope:
    one = Fraction(1)
    # <0, m> <= -1 is infeasible, so the facet list is honest.
    zero = tuple(_ZERO for _ in range(dim))
    return Polytope(dim, (), -1, ((zero, -one),))


def _facets_interval(lo: Fraction, hi: Fraction) -> Tuple[Halfspace, ...]:
    return (((Fraction(1),), hi), ((Fraction(-1),), -lo))


def _facets_polygon(loop: Tuple[Point, ...]) -> Tuple[Halfspace, ...]:
    facets = []
    k = len(loop)
    for i in range(k):
        v, w = loop[i], loop[(i + 1) % k]
        d = sub(w, v)
        a = _primitive((d[1], -d[0]))  # outward normal of a CCW loop
        facets.append((a, dot(a, v)))
    return tuple(facets)


def _facets_segment(p: Point, q: Point) -> Tuple[Halfspace, ...]:
    d = sub(q, p)
    n = _primitive((d[1], -d[0]))
    t = _primitive(d)
    return (
        (n, dot(n, p)),
        (tuple(-c for c in n), -dot(n, p)),
        (t, dot(t, q)),
        (tuple(-c for c in t), -dot(t, p)),
    )


def _facets_point2(p: Point) -> Tuple[Halfspace, ...]:
    one = Fraction(1)
    ex, ey = (one, _ZERO), (_ZERO, one)
    out = []
    for a in (ex, ey):
        out.append((a, dot(a, p)))
        out.append((tuple(-c for c in a), -dot(a, p)))
    return tuple(out)


def hull(points, dim: Optional[int] = None) -> Polytope:
    """Convex hull with an irredundant vertex list and consistent facets.

    Lower-dimensional hulls are returned flagged with their affine
    dimension; interior and collinear points are dropped.
    """
    pts = [_aspoint(p) for p in points]
    if not pts:
        raise EmptyInput("hull of zero points")
    n = dim if dim is not None else len(pts[0])
    if n >= 3:
        raise DimensionUnsupported(
            f"exact mode supports dimensions 1 and 2, got {n}"
            + (" (see nama.approx for the float n=3 mode)" if n == 3 else "")
        )
    if n < 1:
        raise DimensionUnsupported(f"dimension must be >= 1, got {n}")
    for p in pts:
        if len(p) != n:
            raise DimensionMismatch(f"point {p} does not have dimension {n}")

    if n == 1:
        lo = min(p[0] for p in pts)
        hi = max(p[0] for p in pts)
        if lo == hi:
            return Polytope(1, ((lo,),), 0, _facets_interval(lo, lo))
        return Polytope(1, ((lo,), (hi,)), 1, _facets_interval(lo, hi))

    uniq = sorted(set(pts))
    if len(uniq) == 1:
        return Polytope(2, (uniq[0],), 0, _facets_point2(uniq[0]))

    # Andrew's monotone chain, strict turns only (collinear points dropped).
    def chain(seq):
        out = []
        for p in seq:
            while len(out) > 1 and cross(sub(out[-1], out[-2]), sub(p, out[-2])) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = chain(uniq)
    upper = chain(reversed(uniq))
    loop = lower[:-1] + upper[:-1]
    if len(loop) == 2:
        p, q = sorted(loop)
        return Polytope(2, (p, q), 1, _facets_segment(p, q))
    # CCW, rotated to start at the lexicographic minimum.
    i0 = min(range(len(loop)), key=lambda i: loop[i])
    loop = tuple(loop[i0:] + loop[:i0])
    return Polytope(2, loop, 2, _facets_polygon(loop))


def _clip_halfspace_points(pts, a, b, full_loop: bool):
    """Clip a vertex description against {<a,m> <= b}.

    `full_loop` marks a CCW polygon boundary; otherwise `pts` is a point
    or segment and is clipped parametrically.
    """
    vals = [dot(a, p) - b for p in pts]
    if full_loop:
        out = []
        k = len(pts)
        for i in range(k):
            p, q = pts[i], pts[(i + 1) % k]
            fp, fq = vals[i], vals[(i + 1) % k]
            if fp <= 0:
                out.append(p)
            if (fp < 0 < fq) or (fq < 0 < fp):
                t = fp / (fp - fq)
                out.append(add(p, scale_point(sub(q, p), t)))
        return out
    if len(pts) == 1:
        return [pts[0]] if vals[0] <= 0 else []
    p, q = pts
    fp, fq = vals
    if fp <= 0 and fq <= 0:
        return [p, q]
    if fp > 0 and fq > 0:
        return []
    t = fp / (fp - fq)
    mid = add(p, scale_point(sub(q, p), t))
    return [p, mid] if fp <= 0 else [mid, q]


def clip(p: Polytope, halfspaces) -> Polytope:
    """Intersect a polytope with half-spaces {<a,m> <= b}, exactly."""
    if p.is_empty or not halfspaces:
        return p
    n = p.dim
    pts = list(p.vertices)
    full = p.affine_dim == 2
    for a, b in halfspaces:
        a = _aspoint(a)
        if len(a) != n:
            raise DimensionMismatch(f"normal {a} does not have dimension {n}")
        b = Fraction(b)
        if n == 1:
            pts = _clip_halfspace_points(pts, a, b, False)
        else:
            pts = _clip_halfspace_points(pts, a, b, full)
        if not pts:
            return _empty(n)
        if full and len(pts) < 3:
            full = False
    result = hull(pts, n)
    return result


def volume(p: Polytope) -> Fraction:
    """Exact n-dimensional Lebesgue volume; 0 for lower-dimensional sets."""
    if p.is_empty or p.affine_dim < p.dim:
        return _ZERO
    if p.dim == 1:
        return p.vertices[1][0] - p.vertices[0][0]
    # Fan triangulation from the first vertex of the CCW loop.
    v0 = p.vertices[0]
    total = _ZERO
    for i in range(1, len(p.vertices) - 1):
        total += cross(sub(p.vertices[i], v0), sub(p.vertices[i + 1], v0))
    return total / 2


def centroid(p: Polytope) -> Point:
    """Centroid of a full-dimensional polytope (exact)."""
    if p.is_empty or p.affine_dim < p.dim:
        raise EmptyInput("centroid needs a full-dimensional polytope")
    if p.dim == 1:
        return ((p.vertices[0][0] + p.vertices[1][0]) / 2,)
    v0 = p.vertices[0]
    area2 = _ZERO
    cx = _ZERO
    cy = _ZERO
    for i in range(1, len(p.vertices) - 1):
        u, w = p.vertices[i], p.vertices[i + 1]
        a = cross(sub(u, v0), sub(w, v0))
        area2 += a
        cx += a * (v0[0] + u[0] + w[0])
        cy += a * (v0[1] + u[1] + w[1])
    return (cx / (3 * area2), cy / (3 * area2))


def moment(p: Polytope, a: Point, c: Fraction) -> Fraction:
    """Exact integral of the affine map m -> <a, m> + c over p."""
    vol = volume(p)
    if vol == 0:
        return _ZERO
    return vol * (dot(a, centroid(p)) + Fraction(c))


def minkowski_sum(p: Polytope, q: Polytope) -> Polytope:
    """Exact Minkowski sum; support function of the result is the sum."""
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimensions {p.dim} and {q.dim}")
    if p.is_empty or q.is_empty:
        return _empty(p.dim)
    return hull([add(u, v) for u in p.vertices for v in q.vertices], p.dim)


def support_value(p: Polytope, y: Point) -> Fraction:
    """max over m in p of <m, y>, computed on the vertex list."""
    if p.is_empty:
        raise EmptyInput("support value of the empty polytope")
    if len(y) != p.dim:
        raise DimensionMismatch(f"direction {y} does not have dimension {p.dim}")
    return max(dot(v, y) for v in p.vertices)


# --------------------------------------------------------------------------
# Lower convex hulls of lifted points (regular subdivisions).
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LowerCell:
    """One linearity cell of a lower-hull function: <gradient, m> + offset."""

    cell: Polytope
    gradient: Point
    offset: Fraction


@dataclass(frozen=True)
class LowerHull:
    """The function whose graph is the lower convex hull of lifted points.

    Being convex and piecewise affine on the hull of the base points, the
    function equals the max of its cell affines everywhere on its domain.
    """

    dim: int
    cells: Tuple[LowerCell, ...]
    dropped: Tuple[Tuple[Point, Fraction], ...]

    def value(self, m: Point) -> Fraction:
        return max(dot(c.gradient, m) + c.offset for c in self.cells)


def _plane_through(p0, h0, p1, h1, p2, h2):
    """Affine l(m) = <g, m> + c through three lifted 2-D points."""
    d1, d2 = sub(p1, p0), sub(p2, p0)
    det = cross(d1, d2)
    if det == 0:
        raise DegenerateSpan("collinear base points")
    r1, r2 = h1 - h0, h2 - h0
    gx = (r1 * d2[1] - r2 * d1[1]) / det
    gy = (d1[0] * r2 - d2[0] * r1) / det
    g = (gx, gy)
    return g, h0 - dot(g, p0)


def _lower_hull_1d(lifted):
    pts = sorted(lifted)
    chain = []
    for p in pts:
        while len(chain) > 1:
            (x0, h0), (x1, h1) = chain[-2], chain[-1]
            if (h1 - h0) * (p[0] - x0) >= (p[1] - h0) * (x1 - x0):
                chain.pop()
            else:
                break
        chain.append(p)
    cells = []
    for (x0, h0), (x1, h1) in zip(chain, chain[1:]):
        g = (h1 - h0) / (x1 - x0)
        cells.append(
            LowerCell(hull([(x0,), (x1,)], 1), (g,), h0 - g * x0)
        )
    hullobj = LowerHull(1, tuple(cells), ())
    dropped = tuple(
        ((x,), h) for x, h in lifted if h > hullobj.value((x,))
    )
    return LowerHull(1, tuple(cells), dropped)


def _pivot(points, heights, ra, rb, side_sign, ridge_dir):
    """Gift-wrap pivot around the ridge [ra, rb] toward one open side.

    Returns the index of a point defining the extreme supporting plane on
    that side, or None when the ridge is on the boundary.
    """
    best = None
    best_plane = None
    ha = heights[ra]
    hb = heights[rb]
    pa, pb = points[ra], points[rb]
    for i, q in enumerate(points):
        s = cross(ridge_dir, sub(q, pa))
        if side_sign * s <= 0:
            continue
        if best is None:
            best = i
            best_plane = _plane_through(pa, ha, pb, hb, q, heights[i])
            continue
        g, c = best_plane
        if heights[i] < dot(g, q) + c:
            best = i
            best_plane = _plane_through(pa, ha, pb, hb, q, heights[i])
    return best, best_plane


def _lower_hull_2d(points, heights, verify: bool):
    n_pts = len(points)
    base = hull(points, 2)
    if base.affine_dim < 2:
        raise DegenerateSpan("base points do not affinely span the plane")

    # Seed ridge: restrict to the first base-hull edge and take the first
    # edge of the 1-D lower hull along it.
    q0, q1 = base.vertices[0], base.vertices[1]
    d = sub(q1, q0)
    on_edge = []
    for i, p in enumerate(points):
        r = sub(p, q0)
        if cross(d, r) == 0:
            t = (dot(d, r)) / dot(d, d)
            if 0 <= t <= 1:
                on_edge.append((t, heights[i], i))
    on_edge.sort()
    chain = []
    for t, h, i in on_edge:
        while len(chain) > 1:
            (t0, h0, _), (t1, h1, _) = chain[-2], chain[-1]
            if (h1 - h0) * (t - t0) >= (h - h0) * (t1 - t0):
                chain.pop()
            else:
                break
        chain.append((t, h, i))
    ra, rb = chain[0][2], chain[1][2]

    planes = []
    seen_planes = set()
    facet_cells = []
    ridge_queue = [(points[ra], points[rb])]
    done_ridges = {tuple(sorted((points[ra], points[rb])))}

    while ridge_queue:
        pa, pb = ridge_queue.pop()
        ridge_dir = sub(pb, pa)
        ia = points.index(pa)
        ib = points.index(pb)
        for side in (1, -1):
            idx, plane = _pivot(points, heights, ia, ib, side, ridge_dir)
            if idx is None:
                continue
            g, c = plane
            key = (g, c)
            if key in seen_planes:
                continue
            # Contact set of the supporting plane.
            contact = [
                points[i]
                for i in range(n_pts)
                if heights[i] == dot(g, points[i]) + c
            ]
            if verify:
                for i in range(n_pts):
                    if heights[i] < dot(g, points[i]) + c:
                        raise ConsistencyError("pivot produced a non-supporting plane")
            cell = hull(contact, 2)
            if cell.affine_dim < 2:
                continue
            seen_planes.add(key)
            planes.append(plane)
            facet_cells.append(cell)
            k = len(cell.vertices)
            for i in range(k):
                e = tuple(sorted((cell.vertices[i], cell.vertices[(i + 1) % k])))
                if e not in done_ridges:
                    done_ridges.add(e)
                    ridge_queue.append(e)

    cells = tuple(
        LowerCell(cell, g, c) for cell, (g, c) in zip(facet_cells, planes)
    )
    total = sum((volume(c.cell) for c in cells), _ZERO)
    if total != volume(base):
        raise ConsistencyError(
            f"lower-hull cells cover {total}, base hull has volume {volume(base)}"
        )
    return cells


def lower_hull(lifted, verify: bool = True) -> LowerHull:
    """Lower convex hull of lifted points as a cell complex.

    `lifted` is a list of (base point, height).  Cells carry the affine
    function of the hull on them; lifted points strictly above the hull
    are reported in `dropped`.  Raises DegenerateSpan when the base
    points do not affinely span.
    """
    if not lifted:
        raise EmptyInput("lower hull of zero points")
    items = [(_aspoint(p), Fraction(h)) for p, h in lifted]
    dim = len(items[0][0])
    if dim not in (1, 2):
        raise DimensionUnsupported(f"lower hulls support dimensions 1 and 2, got {dim}")
    # Duplicate base points: only the lowest lift can be on the hull.
    lowest = {}
    for p, h in items:
        if len(p) != dim:
            raise DimensionMismatch("mixed dimensions in lifted points")
        if p not in lowest or h < lowest[p]:
            lowest[p] = h
    if dim == 1:
        if len(lowest) < 2:
            raise DegenerateSpan("need two distinct base points")
        hull1 = _lower_hull_1d([(p[0], h) for p, h in lowest.items()])
        dropped = tuple((p, h) for p, h in items if h > hull1.value(p))
        return LowerHull(1, hull1.cells, dropped)
    points = list(lowest.keys())
    heights = [lowest[p] for p in points]
    cells = _lower_hull_2d(points, heights, verify)
    hullobj = LowerHull(2, cells, ())
    dropped = tuple((p, h) for p, h in items if h > hullobj.value(p))
    return LowerHull(2, cells, dropped)


# --------------------------------------------------------------------------
# Exact intersections of 2-D edges (segments and rays), used by the toric
# refinement machinery.
# --------------------------------------------------------------------------


def intersect_edges(p0, d0, r0, p1, d1, r1):
    """Intersection points of two 2-D edges given in parametric form.

    Each edge is {p + s*d : s in [0, r]} with r = None meaning a ray
    (s >= 0).  Returns a list with zero or one transversal intersection
    point; collinear overlaps return [] (callers only need isolated
    crossing points, overlap endpoints are edge endpoints already).
    """
    det = cross(d0, d1)
    if det == 0:
        return []
    rhs = sub(p1, p0)
    s = cross(rhs, d1) / det
    t = cross(rhs, d0) / det
    if s < 0 or (r0 is not None and s > r0):
        return []
    if t < 0 or (r1 is not None and t > r1):
        return []
    return [add(p0, scale_point(d0, s))]
