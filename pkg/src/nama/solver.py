"""Variational solver for MA(phi) = sum w_i delta_{x_i} on a Newton polytope.

The concave dual objective F(t) = E(envelope(t)) - sum w_i t_i has gradient
(cell masses - target weights), so maximizing it solves the equation.  The
ascent is damped and monotone: every accepted step must increase the
objective (backtracking Armijo search).  Float mode adds Newton
acceleration with Levenberg damping: the damping rises whenever a step
collapses a previously positive cell, which keeps sites active without
the hard rejection that can deadlock on sliver cells.  The cell geometry
at each iterate is evaluated exactly (every float is a rational); only
the iterate itself is rounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from . import polyhedra as pg
from . import toric as tc
from .errors import ArityMismatch, ConsistencyError, MassMismatch, NotConverged
from .polyhedra import Point, sub
from .toric import AtomicMeasure, NewtonPolytope, ToricPsh

_ZERO = Fraction(0)


@dataclass(frozen=True)
class DiracProblem:
    """Target measure sum w_i delta_{x_i} with total mass vol(Delta)."""

    delta: NewtonPolytope
    sites: Tuple[Point, ...]
    weights: Tuple[Fraction, ...]

    def __post_init__(self):
        sites = tuple(tuple(Fraction(c) for c in x) for x in self.sites)
        weights = tuple(Fraction(w) for w in self.weights)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "weights", weights)
        if len(sites) != len(weights):
            raise ArityMismatch("one weight per site required")
        if not sites:
            raise ArityMismatch("need at least one site")
        if len(set(sites)) != len(sites):
            raise ValueError("sites must be distinct")
        for x in sites:
            if len(x) != self.delta.dim:
                raise ArityMismatch(f"site {x} vs dimension {self.delta.dim}")
        if any(w <= 0 for w in weights):
            raise ValueError("weights must be positive")
        if sum(weights) != self.delta.volume:
            raise MassMismatch(
                f"total weight {sum(weights)} differs from vol(Delta) = {self.delta.volume}"
            )

    def barycenter(self) -> Point:
        n = self.delta.dim
        total = sum(self.weights)
        return tuple(
            sum((w * x[k] for x, w in zip(self.sites, self.weights)), _ZERO) / total
            for k in range(n)
        )

    def reference(self) -> ToricPsh:
        """Canonical reference potential: the envelope pinned at the
        weighted barycenter (the exact solution of the one-site problem)."""
        return tc.envelope(self.delta, [(self.barycenter(), _ZERO)])


@dataclass(frozen=True)
class SolverConfig:
    tol: Optional[Fraction] = None  # None: 0 in rational mode, 1e-10 in float
    max_iter: int = 10_000
    damping: Fraction = Fraction(1, 2)
    mode: str = "float"
    init: Optional[Tuple[Fraction, ...]] = None


@dataclass(frozen=True)
class Solution:
    problem: DiracProblem
    t: Tuple[Fraction, ...]
    potential: ToricPsh
    masses: AtomicMeasure
    residual: Fraction
    iterations: int
    objective: Fraction

    def mass_vector(self) -> Tuple[Fraction, ...]:
        return tuple(self.masses.weight_at(x) for x in self.problem.sites)


def _envelope_at(p: DiracProblem, t) -> ToricPsh:
    return tc.envelope(p.delta, list(zip(p.sites, t)))


def _masses_at(p: DiracProblem, phi: ToricPsh) -> Tuple[Fraction, ...]:
    mu = tc.ma_measure(phi)
    return tuple(mu.weight_at(x) for x in p.sites)


def _value_legendre(p: DiracProblem, phi: ToricPsh, t, ref: ToricPsh) -> Fraction:
    return tc.legendre_energy(phi, ref) - sum(
        (w * Fraction(ti) for w, ti in zip(p.weights, t)), _ZERO
    )


def dual_objective(p: DiracProblem, t: Sequence, mode: str = "rational"):
    """Value and gradient of F(t) = E(envelope(t)) - sum w_i t_i.

    The gradient is exactly (Laguerre masses - weights); pruned sites get
    gradient -w_i.  In rational mode the value is computed both through
    the mixed-measure energy and through the Legendre integral, and the
    two must agree exactly.
    """
    if len(t) != len(p.sites):
        raise ArityMismatch(f"expected {len(p.sites)} potentials, got {len(t)}")
    t = tuple(Fraction(x) for x in t)
    phi = _envelope_at(p, t)
    ref = p.reference()
    masses = _masses_at(p, phi)
    grad = tuple(h - w for h, w in zip(masses, p.weights))
    value = _value_legendre(p, phi, t, ref)
    if mode == "rational":
        via_mixed = tc.energy_via_mixed(phi, ref) - sum(
            (w * ti for w, ti in zip(p.weights, t)), _ZERO
        )
        if via_mixed != value:
            raise ConsistencyError(f"energy routes disagree: {via_mixed} vs {value}")
        return value, grad
    return float(value), tuple(float(g) for g in grad)


def _solution(p, t, phi, masses, iters, ref) -> Solution:
    mu = tc.ma_measure(phi)
    residual = max(abs(h - w) for h, w in zip(masses, p.weights))
    return Solution(
        problem=p,
        t=tuple(t),
        potential=phi,
        masses=mu,
        residual=residual,
        iterations=iters,
        objective=_value_legendre(p, phi, t, ref),
    )


def _solve_1d_exact(p: DiracProblem) -> Tuple[Fraction, ...]:
    """Closed-form 1-D solution: slopes of the potential jump by w_i at
    x_i, starting at the left endpoint of Delta."""
    alpha = p.delta.body.vertices[0][0]
    order = sorted(range(len(p.sites)), key=lambda i: p.sites[i])
    t = [None] * len(p.sites)
    t[order[0]] = _ZERO
    slope = alpha + p.weights[order[0]]
    for prev, cur in zip(order, order[1:]):
        gap = p.sites[cur][0] - p.sites[prev][0]
        t[cur] = t[prev] + slope * gap
        slope += p.weights[cur]
    return tuple(t)


def _wall_hessian(p: DiracProblem, phi: ToricPsh) -> np.ndarray:
    """d(masses)/dt: off-diagonal entries are wall measure over site
    distance, diagonals make rows sum to zero."""
    n = len(p.sites)
    gens = dict(zip(phi.sites, range(len(phi.sites))))
    M = np.zeros((n, n))
    dim = p.delta.dim
    for i in range(n):
        if p.sites[i] not in gens:
            continue
        ci = phi.cells[gens[p.sites[i]]]
        for j in range(i + 1, n):
            if p.sites[j] not in gens:
                continue
            xi, xj = p.sites[i], p.sites[j]
            ti = phi.generators[gens[xi]][1]
            tj = phi.generators[gens[xj]][1]
            wall = pg.clip(ci, [(sub(xi, xj), ti - tj)])
            if wall.affine_dim != dim - 1:
                continue
            if dim == 1:
                measure = 1.0
            else:
                a, b = wall.vertices[0], wall.vertices[-1]
                measure = math.hypot(*(float(c) for c in sub(b, a)))
            dist = math.hypot(*(float(c) for c in sub(xi, xj)))
            M[i, j] = M[j, i] = measure / dist
    for i in range(n):
        M[i, i] = -np.sum(M[i]) + M[i, i]
    return M


def solve(p: DiracProblem, config: SolverConfig = SolverConfig()) -> Solution:
    """Maximize the dual objective; returns a Solution whose Laguerre
    masses match the target weights within tol * vol(Delta).

    Rational mode accepts only exact stationarity (1-D instances are
    solved in closed form; for n = 2 the damped ascent usually ends in
    NotConverged carrying the best iterate unless the optimum is hit
    exactly).  Float mode runs damped Newton with a gradient fallback.
    """
    mode = config.mode
    if mode not in ("rational", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    tol = config.tol
    if tol is None:
        tol = _ZERO if mode == "rational" else Fraction(1, 10**10)
    tol = Fraction(tol)
    vol = p.delta.volume
    ref = p.reference()
    n = len(p.sites)

    if config.init is not None:
        if len(config.init) != n:
            raise ArityMismatch("init vector has wrong length")
        t = [Fraction(x) for x in config.init]
    elif mode == "rational" and p.delta.dim == 1:
        t = list(_solve_1d_exact(p))
    else:
        xbar = p.barycenter()
        t = [tc.support_value(p.delta, sub(x, xbar)) for x in p.sites]

    if mode == "float":
        t = [Fraction(float(x)) for x in t]

    def state(tvec):
        phi = _envelope_at(p, tvec)
        masses = _masses_at(p, phi)
        grad = [h - w for h, w in zip(masses, p.weights)]
        value = _value_legendre(p, phi, tvec, ref)
        return phi, masses, grad, value

    phi, masses, grad, value = state(t)
    best = (value, list(t), phi, masses, 0)
    it_done = 0
    lam = 1e-9  # Levenberg damping: ~Newton when tiny, ~gradient when large

    for it in range(config.max_iter):
        residual = max(abs(g) for g in grad)
        if residual <= tol * vol:
            return _solution(p, t, phi, masses, it, ref)

        directions = []
        if mode == "float":
            # Damped Newton: (M - lam I) d = -g is an ascent direction for
            # every lam > 0 because the wall Hessian M is negative
            # semidefinite; lam rises whenever a step collapses a
            # previously positive cell (the usual guard in semi-discrete
            # transport, in damping form) and falls back toward pure
            # Newton as the geometry stays healthy.
            g = np.array([float(x) for x in grad])
            M = _wall_hessian(p, phi)
            try:
                dl = np.linalg.solve(M - lam * np.eye(len(g)), -g)
                dl -= dl.mean()
                if np.isfinite(dl).all() and float(np.dot(dl, g)) > 0:
                    directions.append(("newton", [Fraction(float(x)) for x in dl]))
            except np.linalg.LinAlgError:
                pass
            directions.append(("gradient", [Fraction(float(x)) for x in g]))
        else:
            directions.append(("gradient", list(grad)))

        positive = [i for i, h in enumerate(masses) if h > 0]
        accepted = False
        for kind, d in directions:
            slope = sum(di * gi for di, gi in zip(d, grad))
            if slope <= 0:
                continue
            step = Fraction(1)
            for _ in range(60):
                trial = [ti + step * di for ti, di in zip(t, d)]
                if mode == "float":
                    trial = [Fraction(float(x)) for x in trial]
                phi2, masses2, grad2, value2 = state(trial)
                if value2 > value + Fraction(1, 10**4) * step * slope:
                    kept_cells = all(masses2[i] > 0 for i in positive)
                    t, phi, masses, grad, value = trial, phi2, masses2, grad2, value2
                    accepted = True
                    if kind == "newton":
                        if step == 1 and kept_cells:
                            lam = max(lam / 10, 1e-12)
                        else:
                            lam = min(lam * 10, 1e8)
                    break
                step *= config.damping
            if accepted:
                break
            if kind == "newton":
                lam = min(lam * 100, 1e8)
        if not accepted:
            break
        it_done = it + 1
        if value > best[0]:
            best = (value, list(t), phi, masses, it_done)

    residual = max(abs(g) for g in grad)
    if residual <= tol * vol:
        return _solution(p, t, phi, masses, it_done, ref)
    value_b, t_b, phi_b, masses_b, it_b = best
    raise NotConverged(_solution(p, t_b, phi_b, masses_b, it_b, ref), it_done)


def normalize(s: Solution) -> Solution:
    """Shift t by a constant so the potential's maximum over the sites
    (hence over the hull of sites and atoms) is exactly 0."""
    shift = max(s.potential.value(x) for x in s.problem.sites)
    if shift == 0:
        return s
    t = tuple(ti - shift for ti in s.t)
    phi = _envelope_at(s.problem, t)
    return replace(s, t=t, potential=phi)


def cl_measure(f: ToricPsh) -> AtomicMeasure:
    """Chambert-Loir normalization: every MA weight times n!, so the
    total mass is n! vol(Delta) = deg L."""
    n = f.delta.dim
    return tc.ma_measure(f).scaled(math.factorial(n))
