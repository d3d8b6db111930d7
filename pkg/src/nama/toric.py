"""Toric potentials: convex piecewise-affine functions with slopes in a
Newton polytope, their envelopes, Monge-Ampere measures and energy.

The canonical representation is dual: a potential is stored through its
envelope generators (site, value), so that the dual function on the
polytope is u(m) = max_a(<x_a, m> - t_a) and the potential itself is
f(y) = sup_{m in Delta}(<m, y> - u(m)).  Monge-Ampere masses are then
exact cell volumes of the induced subdivision of Delta, and envelopes are
closure operations on generator lists.  All arithmetic is rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import polyhedra as pg
from .errors import (
    ConsistencyError,
    DeltaMismatch,
    DimensionMismatch,
    EmptyInput,
    EmptyLattice,
    NotDominated,
    WrongArity,
)
from .polyhedra import Point, Polytope, dot, sub

_ZERO = Fraction(0)
_HALF = Fraction(1, 2)


class NewtonPolytope:
    """A full-dimensional rational polytope carrying the reference class.

    Its volume is the total Monge-Ampere mass of every potential below.
    """

    __slots__ = ("body", "volume")

    def __init__(self, body: Polytope):
        if not body.is_full_dimensional:
            raise EmptyInput("a Newton polytope must be full-dimensional")
        self.body = body
        self.volume = pg.volume(body)

    @property
    def dim(self) -> int:
        return self.body.dim

    def __eq__(self, other):
        return isinstance(other, NewtonPolytope) and self.body == other.body

    def __hash__(self):
        return hash(self.body)

    def __repr__(self):
        return f"NewtonPolytope({list(self.body.vertices)})"


def newton_polytope(vertices, dim: Optional[int] = None) -> NewtonPolytope:
    return NewtonPolytope(pg.hull(vertices, dim))


def support_value(delta: NewtonPolytope, y: Point) -> Fraction:
    """Value of the support function g_Delta(y) = max_{m in Delta} <m, y>."""
    if len(y) != delta.dim:
        raise DimensionMismatch(f"direction {y} vs dimension {delta.dim}")
    return pg.support_value(delta.body, tuple(Fraction(c) for c in y))


def _merge_constraints(constraints) -> List[Tuple[Point, Fraction]]:
    merged: Dict[Point, Fraction] = {}
    for x, t in constraints:
        x = tuple(Fraction(c) for c in x)
        t = Fraction(t)
        if x not in merged or t < merged[x]:
            merged[x] = t
    return sorted(merged.items())


class ToricPsh:
    """A semipositive toric potential in canonical envelope form.

    Construction canonicalizes: duplicate sites are merged keeping the
    smallest value, and generators whose cell in Delta is not
    full-dimensional are pruned (they never carry mass and do not change
    the function).  After that, f(x_a) = t_a holds for every generator.
    """

    __slots__ = ("delta", "generators", "cells", "_pieces")

    def __init__(self, delta: NewtonPolytope, generators):
        gens = _merge_constraints(generators)
        if not gens:
            raise EmptyInput("a potential needs at least one generator")
        n = delta.dim
        for x, _ in gens:
            if len(x) != n:
                raise DimensionMismatch(f"site {x} vs dimension {n}")
        kept: List[Tuple[Point, Fraction]] = []
        cells: List[Polytope] = []
        for xa, ta in gens:
            halfspaces = [
                (sub(xb, xa), tb - ta) for xb, tb in gens if xb != xa
            ]
            cell = pg.clip(delta.body, halfspaces)
            if cell.is_full_dimensional:
                kept.append((xa, ta))
                cells.append(cell)
        self.delta = delta
        self.generators = tuple(kept)
        self.cells = tuple(cells)
        self._pieces = None

    @property
    def sites(self) -> Tuple[Point, ...]:
        return tuple(x for x, _ in self.generators)

    def dual_value(self, m: Point) -> Fraction:
        """u(m) = max_a(<x_a, m> - t_a), the dual function on Delta."""
        return max(dot(x, m) - t for x, t in self.generators)

    @property
    def pieces(self) -> Tuple[Tuple[Point, Fraction], ...]:
        """Affine pieces of f as (slope, dual value at the slope).

        The slopes are exactly the vertices of the regular subdivision of
        Delta induced by lifting m to u(m), i.e. all cell vertices.
        """
        if self._pieces is None:
            seen = {}
            for cell in self.cells:
                for v in cell.vertices:
                    if v not in seen:
                        seen[v] = self.dual_value(v)
            self._pieces = tuple(sorted(seen.items()))
        return self._pieces

    def value(self, y: Point) -> Fraction:
        """f(y) = sup_{m in Delta}(<m, y> - u(m)), exact."""
        y = tuple(Fraction(c) for c in y)
        if len(y) != self.delta.dim:
            raise DimensionMismatch(f"point {y} vs dimension {self.delta.dim}")
        return max(dot(v, y) - uv for v, uv in self.pieces)

    def shift(self, c) -> "ToricPsh":
        c = Fraction(c)
        return ToricPsh(self.delta, [(x, t + c) for x, t in self.generators])

    def subdifferential(self, y: Point) -> Polytope:
        """The polytope of maximizing slopes at y (a cell of the dual
        subdivision; full-dimensional exactly at the MA atoms)."""
        fy = self.value(y)
        halfspaces = [(sub(x, y), t - fy) for x, t in self.generators]
        return pg.clip(self.delta.body, halfspaces)

    def __eq__(self, other):
        return (
            isinstance(other, ToricPsh)
            and self.delta == other.delta
            and self.generators == other.generators
        )

    def __hash__(self):
        return hash((self.delta, self.generators))

    def __repr__(self):
        return f"ToricPsh(delta={self.delta!r}, generators={list(self.generators)})"


def envelope(delta: NewtonPolytope, constraints) -> ToricPsh:
    """Largest convex function with slopes in Delta and f(x_a) <= t_a.

    Duplicate sites are merged keeping the minimal value.  The result
    interpolates: f(x_a) = t_a for every retained generator.
    """
    return ToricPsh(delta, constraints)


def g_delta(delta: NewtonPolytope) -> ToricPsh:
    """The reference potential: the support function of Delta itself."""
    origin = tuple(_ZERO for _ in range(delta.dim))
    return ToricPsh(delta, [(origin, _ZERO)])


class TestFunction:
    """A finite minimum of toric potentials; the computable dense class of
    continuous functions used for envelope and orthogonality checks."""

    __slots__ = ("delta", "branches")

    def __init__(self, branches: Sequence[ToricPsh]):
        branches = tuple(branches)
        if not branches:
            raise EmptyInput("a test function needs at least one branch")
        delta = branches[0].delta
        for b in branches[1:]:
            if b.delta != delta:
                raise DeltaMismatch("test function branches over different polytopes")
        self.delta = delta
        self.branches = branches

    def value(self, y: Point) -> Fraction:
        return min(b.value(y) for b in self.branches)

    def shift(self, c) -> "TestFunction":
        return TestFunction([b.shift(c) for b in self.branches])

    def generator_sites(self) -> Tuple[Point, ...]:
        out = []
        for b in self.branches:
            out.extend(b.sites)
        return tuple(sorted(set(out)))

    def __eq__(self, other):
        return isinstance(other, TestFunction) and self.branches == other.branches

    def __hash__(self):
        return hash(self.branches)


def psh_envelope(f: TestFunction) -> ToricPsh:
    """Largest potential below f: the envelope over the union of all
    branch generators (conjugating a min gives the max of the duals)."""
    constraints = []
    for b in f.branches:
        constraints.extend(b.generators)
    return envelope(f.delta, constraints)


def to_pieces(f: ToricPsh):
    """Primal view: (slope, intercept) pairs with f = max(<slope,y> + c).

    The slopes are the vertices of the regular subdivision of Delta
    induced by the dual function.
    """
    return tuple((v, -uv) for v, uv in f.pieces)


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely many distinct rational points with positive weights."""

    atoms: Tuple[Tuple[Point, Fraction], ...]

    @staticmethod
    def from_items(items) -> "AtomicMeasure":
        merged: Dict[Point, Fraction] = {}
        for p, w in items:
            p = tuple(Fraction(c) for c in p)
            merged[p] = merged.get(p, _ZERO) + Fraction(w)
        atoms = tuple(sorted((p, w) for p, w in merged.items() if w != 0))
        for _, w in atoms:
            if w < 0:
                raise ValueError("atomic measures here are positive")
        return AtomicMeasure(atoms)

    @property
    def total_mass(self) -> Fraction:
        return sum((w for _, w in self.atoms), _ZERO)

    def weight_at(self, p: Point) -> Fraction:
        p = tuple(Fraction(c) for c in p)
        for q, w in self.atoms:
            if q == p:
                return w
        return _ZERO

    def points(self) -> Tuple[Point, ...]:
        return tuple(p for p, _ in self.atoms)

    def scaled(self, s) -> "AtomicMeasure":
        s = Fraction(s)
        return AtomicMeasure.from_items((p, s * w) for p, w in self.atoms)


def ma_measure(f: ToricPsh) -> AtomicMeasure:
    """Monge-Ampere measure: an atom at each generator site whose weight
    is the exact volume of its cell in Delta.  Total mass = vol(Delta)."""
    items = [(x, pg.volume(cell)) for (x, _), cell in zip(f.generators, f.cells)]
    measure = AtomicMeasure.from_items(items)
    if measure.total_mass != f.delta.volume:
        raise ConsistencyError(
            f"cells cover mass {measure.total_mass}, expected {f.delta.volume}"
        )
    return measure


def integrate(g, mu: AtomicMeasure) -> Fraction:
    """Exact pairing sum of weight * g(point) over the atoms."""
    return sum((w * g.value(p) for p, w in mu.atoms), _ZERO)


# --------------------------------------------------------------------------
# Pointwise max and pointwise affine combinations.
# --------------------------------------------------------------------------


def max_combine(f: ToricPsh, g: ToricPsh) -> ToricPsh:
    """Pointwise maximum, rebuilt exactly through one Legendre round trip.

    The dual of max(f, g) is the convex envelope of min(u_f, u_g), i.e.
    the lower hull of both functions' lifted pieces.
    """
    if f.delta != g.delta:
        raise DeltaMismatch("max of potentials over different polytopes")
    lifted = list(f.pieces) + list(g.pieces)
    hull = pg.lower_hull(lifted, verify=False)
    gens = [(cell.gradient, -cell.offset) for cell in hull.cells]
    return ToricPsh(f.delta, gens)


def _dual_edges(f: ToricPsh):
    """Edges of the linearity complex of f in y-space.

    Bounded edges join the sites of adjacent cells; unbounded edges are
    rays leaving a site along the outward normal of the Delta-facet its
    cell touches.  Each edge is (origin, direction, reach) with reach None
    for rays and 1 for site-to-site segments.
    """
    edges = []
    gens = f.generators
    cells = f.cells
    k = len(gens)
    for i in range(k):
        xi, ti = gens[i]
        for j in range(i + 1, k):
            xj, tj = gens[j]
            wall = pg.clip(cells[i], [(sub(xi, xj), ti - tj)])
            if wall.affine_dim == f.delta.dim - 1:
                edges.append((xi, sub(xj, xi), Fraction(1)))
        for a, b in f.delta.body.facets:
            face = pg.clip(cells[i], [(tuple(-c for c in a), -b)])
            if face.affine_dim == f.delta.dim - 1:
                edges.append((xi, a, None))
    return edges


def _refinement_candidates(f: ToricPsh, g: ToricPsh):
    """Points that can carry mass for a pointwise combination of f and g:
    sites of either function plus transversal crossings of their complexes'
    edges."""
    pts = {x for x in f.sites} | {x for x in g.sites}
    if f.delta.dim == 2:
        ef, eg = _dual_edges(f), _dual_edges(g)
        for p0, d0, r0 in ef:
            for p1, d1, r1 in eg:
                for q in pg.intersect_edges(p0, d0, r0, p1, d1, r1):
                    pts.add(q)
    return sorted(pts)


def scale_potential(f: ToricPsh, s) -> ToricPsh:
    """The potential s*f for s > 0; its slope polytope is s*Delta."""
    s = Fraction(s)
    if s <= 0:
        raise ValueError("scaling coefficient must be positive")
    delta = NewtonPolytope(f.delta.body.scaled(s))
    return ToricPsh(delta, [(x, s * t) for x, t in f.generators])


def _pair_sum(f: ToricPsh, g: ToricPsh) -> ToricPsh:
    """Pointwise sum via the common refinement of the two complexes.

    The generators of f + g sit at the refinement vertices, with values
    f + g there; completeness of the candidate set is certified by the
    cell volumes summing to vol(Minkowski sum of the slope polytopes).
    """
    if f.delta.dim != g.delta.dim:
        raise DimensionMismatch("sum of potentials in different dimensions")
    delta = NewtonPolytope(pg.minkowski_sum(f.delta.body, g.delta.body))
    gens = []
    total = _ZERO
    for w in _refinement_candidates(f, g):
        cell = pg.minkowski_sum(f.subdifferential(w), g.subdifferential(w))
        vol = pg.volume(cell)
        if vol > 0:
            gens.append((w, f.value(w) + g.value(w)))
            total += vol
    if total != delta.volume:
        raise ConsistencyError(
            f"refinement cells cover {total}, expected {delta.volume}"
        )
    return ToricPsh(delta, gens)


def affine_combination(terms) -> ToricPsh:
    """Pointwise combination sum(c_i * f_i) with positive rational c_i."""
    terms = [(Fraction(c), f) for c, f in terms]
    if not terms:
        raise EmptyInput("empty combination")
    out = None
    for c, f in terms:
        scaled = scale_potential(f, c)
        out = scaled if out is None else _pair_sum(out, scaled)
    return out


def convex_path(f: ToricPsh, g: ToricPsh, t) -> ToricPsh:
    """(1-t) * f + t * g pointwise, for rational t in [0, 1]."""
    t = Fraction(t)
    if t == 0:
        return f
    if t == 1:
        return g
    return affine_combination([(1 - t, f), (t, g)])


def mixed_ma(fs: Sequence[ToricPsh]) -> AtomicMeasure:
    """Polarized Monge-Ampere measure of n potentials.

    Extracted from MA of the midpoint combination; equivalently the atoms
    carry mixed volumes of the subdifferential cells.  Symmetric,
    multilinear, and of total mass vol(Delta).
    """
    fs = list(fs)
    if not fs:
        raise WrongArity("mixed measure of zero potentials")
    delta = fs[0].delta
    n = delta.dim
    if len(fs) != n:
        raise WrongArity(f"need exactly {n} potentials, got {len(fs)}")
    for f in fs[1:]:
        if f.delta != delta:
            raise DeltaMismatch("mixed measure over different polytopes")
    if n == 1:
        return ma_measure(fs[0])
    f, g = fs
    if f == g:
        return ma_measure(f)
    h = affine_combination([(_HALF, f), (_HALF, g)])
    acc: Dict[Point, Fraction] = {}
    for p, w in ma_measure(h).atoms:
        acc[p] = acc.get(p, _ZERO) + 2 * w
    for p, w in ma_measure(f).atoms:
        acc[p] = acc.get(p, _ZERO) - _HALF * w
    for p, w in ma_measure(g).atoms:
        acc[p] = acc.get(p, _ZERO) - _HALF * w
    for p, w in acc.items():
        if w < 0:
            raise ConsistencyError(f"negative mixed mass {w} at {p}")
    measure = AtomicMeasure.from_items(acc.items())
    if measure.total_mass != delta.volume:
        raise ConsistencyError("mixed measure lost mass")
    return measure


# --------------------------------------------------------------------------
# Energy.
# --------------------------------------------------------------------------


def legendre_energy(f: ToricPsh, ref: ToricPsh) -> Fraction:
    """Energy as the exact integral of (u_ref - u_f) over Delta.

    Computed by simplex decomposition of the common refinement of both
    dual subdivisions; agrees with the mixed-measure energy sum.
    """
    if f.delta != ref.delta:
        raise DeltaMismatch("energy of potentials over different polytopes")
    total = _ZERO
    for (xa, ta), cell in zip(f.generators, f.cells):
        for (xb, tb), rcell in zip(ref.generators, ref.cells):
            piece = pg.clip(cell, [(sub(xc, xb), tc - tb) for xc, tc in ref.generators if xc != xb])
            if piece.is_full_dimensional:
                total += pg.moment(piece, sub(xb, xa), ta - tb)
    return total


def energy_via_mixed(f: ToricPsh, ref: ToricPsh) -> Fraction:
    """Energy as 1/(n+1) sum_j of the pairing of (f - ref) against the
    mixed measures with j copies of f; the defining formula."""
    if f.delta != ref.delta:
        raise DeltaMismatch("energy of potentials over different polytopes")
    n = f.delta.dim
    total = _ZERO
    for j in range(n + 1):
        mu = mixed_ma([f] * j + [ref] * (n - j))
        total += sum((w * (f.value(p) - ref.value(p)) for p, w in mu.atoms), _ZERO)
    return total / (n + 1)


def energy(f: ToricPsh, ref: ToricPsh) -> Fraction:
    """E(f, ref): the primitive of the Monge-Ampere operator, exact.

    The Legendre-integral form is used; `energy_via_mixed` computes the
    same value through the mixed-measure sum and the equality of the two
    routes is asserted by the verification suites.
    """
    return legendre_energy(f, ref)


# --------------------------------------------------------------------------
# Lattice envelopes (finite slope sets) and orthogonality defects.
# --------------------------------------------------------------------------


def _lattice_points(delta: NewtonPolytope, m: int):
    import math

    body = delta.body
    n = delta.dim
    pts = []
    if n == 1:
        lo, hi = body.vertices[0][0], body.vertices[-1][0]
        for k in range(math.ceil(lo * m), math.floor(hi * m) + 1):
            pts.append((Fraction(k, m),))
        return pts
    ys = [v[1] for v in body.vertices]
    lo, hi = min(ys), max(ys)
    for ky in range(math.ceil(lo * m), math.floor(hi * m) + 1):
        y = Fraction(ky, m)
        row = pg.clip(body, [((_ZERO, Fraction(1)), y), ((_ZERO, Fraction(-1)), -y)])
        if row.is_empty:
            continue
        xs = [v[0] for v in row.vertices]
        for kx in range(math.ceil(min(xs) * m), math.floor(max(xs) * m) + 1):
            pts.append((Fraction(kx, m), y))
    return pts


def lattice_envelope(delta: NewtonPolytope, constraints, m: int) -> ToricPsh:
    """Envelope with slopes restricted to Delta intersected with the
    (1/m)-integer lattice.

    Always below the exact envelope.  When the lattice hull is a proper
    full-dimensional subpolytope of Delta the result is returned over that
    smaller Newton polytope (the restricted potential has smaller total
    mass); a degenerate lattice hull raises EmptyLattice.
    """
    if m < 1:
        raise ValueError("lattice order must be >= 1")
    gens = _merge_constraints(constraints)
    if not gens:
        raise EmptyInput("need at least one constraint")
    pts = _lattice_points(delta, m)
    if not pts:
        raise EmptyLattice(f"Delta contains no point of the 1/{m} lattice")
    dual = lambda q: max(dot(x, q) - t for x, t in gens)
    lifted = [(q, dual(q)) for q in pts]
    base = pg.hull(pts, delta.dim)
    if not base.is_full_dimensional:
        raise EmptyLattice(
            f"the 1/{m} lattice points of Delta do not span; no representable envelope"
        )
    hull = pg.lower_hull(lifted, verify=False)
    out_delta = delta if base == delta.body else NewtonPolytope(base)
    return ToricPsh(out_delta, [(c.gradient, -c.offset) for c in hull.cells])


def orthogonality_defect(f: TestFunction, phi: ToricPsh) -> Fraction:
    """The pairing of (f - phi) against MA(phi), exact and >= 0.

    Requires phi <= f, checked at the MA atoms and at all branch
    generator sites; the envelope of f has defect exactly 0.
    """
    measure = ma_measure(phi)
    checkpoints = set(measure.points()) | set(f.generator_sites())
    for p in sorted(checkpoints):
        if phi.value(p) > f.value(p):
            raise NotDominated(f"phi exceeds f at {p}")
    return sum((w * (f.value(p) - phi.value(p)) for p, w in measure.atoms), _ZERO)


# --------------------------------------------------------------------------
# Extremes of differences (used for capacity normalization).
# --------------------------------------------------------------------------


def difference_range(f: ToricPsh, g: ToricPsh):
    """Exact (min, max) of the bounded function f - g over the whole space.

    f - g is affine on the common refinement of the two complexes and
    constant along recession directions, so the extremes are attained on
    the refinement vertices.
    """
    if f.delta != g.delta:
        raise DeltaMismatch("difference of potentials over different polytopes")
    vals = [f.value(p) - g.value(p) for p in _refinement_candidates(f, g)]
    return min(vals), max(vals)
