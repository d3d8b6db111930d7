"""Dual-objective and solver tests for the Dirac Monge-Ampere problem."""

import random
from fractions import Fraction as F

import pytest

from nama import solver as sv
from nama import toric as tc
from nama.errors import ArityMismatch, MassMismatch, NotConverged


def interval(a, b):
    return tc.newton_polytope([(a,), (b,)], 1)


def square(side=1):
    return tc.newton_polytope([(0, 0), (side, 0), (side, side), (0, side)], 2)


UNIT = interval(0, 1)
SQ = square()
TRI = tc.newton_polytope([(0, 0), (1, 0), (0, 1)], 2)


class TestProblem:
    def test_mass_mismatch(self):
        with pytest.raises(MassMismatch):
            sv.DiracProblem(SQ, ((F(0), F(0)),), (F(2),))

    def test_distinct_sites(self):
        with pytest.raises(ValueError):
            sv.DiracProblem(SQ, ((F(0), F(0)), (F(0), F(0))), (F(1, 2), F(1, 2)))


class TestDualObjective:
    def test_single_site_zero_gradient(self):
        p = sv.DiracProblem(SQ, ((F(1, 3), F(1, 5)),), (F(1),))
        value, grad = sv.dual_objective(p, (F(0),))
        assert grad == (F(0),)
        assert value == 0

    def test_gradient_is_masses_minus_weights(self):
        rng = random.Random(3)
        for delta in (UNIT, SQ):
            n = delta.dim
            sites = []
            while len(sites) < 3:
                x = tuple(F(rng.randint(-4, 4), 2) for _ in range(n))
                if x not in sites:
                    sites.append(x)
            raw = [F(rng.randint(1, 5)) for _ in sites]
            tot = sum(raw)
            weights = [w * delta.volume / tot for w in raw]
            weights[-1] = delta.volume - sum(weights[:-1])
            p = sv.DiracProblem(delta, tuple(sites), tuple(weights))
            for _ in range(5):
                t = tuple(F(rng.randint(-3, 3), 4) for _ in sites)
                value, grad = sv.dual_objective(p, t)
                phi = tc.envelope(delta, list(zip(sites, t)))
                mu = tc.ma_measure(phi)
                for i, x in enumerate(sites):
                    assert grad[i] == mu.weight_at(x) - weights[i]

    def test_translation_gauge(self):
        p = sv.DiracProblem(SQ, ((F(0), F(0)), (F(1), F(1))), (F(1, 2), F(1, 2)))
        t = (F(1, 3), F(-1, 7))
        c = F(5, 2)
        v1, g1 = sv.dual_objective(p, t)
        v2, g2 = sv.dual_objective(p, tuple(ti + c for ti in t))
        assert v1 == v2
        assert g1 == g2

    def test_float_finite_differences(self):
        p = sv.DiracProblem(
            SQ,
            ((F(0), F(0)), (F(1), F(0)), (F(1, 2), F(1))),
            (F(1, 4), F(1, 4), F(1, 2)),
        )
        t0 = [0.05, -0.02, 0.01]
        value, grad = sv.dual_objective(p, t0, mode="float")
        h = 1e-6
        for i in range(3):
            tp = list(t0)
            tm = list(t0)
            tp[i] += h
            tm[i] -= h
            vp, _ = sv.dual_objective(p, tp, mode="float")
            vm, _ = sv.dual_objective(p, tm, mode="float")
            fd = (vp - vm) / (2 * h)
            scale = max(1.0, abs(grad[i]))
            assert abs(fd - grad[i]) / scale <= 1e-4

    def test_arity(self):
        p = sv.DiracProblem(SQ, ((F(0), F(0)),), (F(1),))
        with pytest.raises(ArityMismatch):
            sv.dual_objective(p, (F(0), F(0)))

    def test_concavity_along_segments(self):
        p = sv.DiracProblem(
            SQ, ((F(0), F(0)), (F(1), F(0)), (F(0), F(1))), (F(1, 3), F(1, 3), F(1, 3))
        )
        rng = random.Random(11)
        for _ in range(10):
            t1 = tuple(F(rng.randint(-4, 4), 4) for _ in range(3))
            t2 = tuple(F(rng.randint(-4, 4), 4) for _ in range(3))
            v1, _ = sv.dual_objective(p, t1)
            v2, _ = sv.dual_objective(p, t2)
            for lam in (F(1, 4), F(1, 2), F(3, 4)):
                tm = tuple(lam * a + (1 - lam) * b for a, b in zip(t1, t2))
                vm, _ = sv.dual_objective(p, tm)
                assert vm >= lam * v1 + (1 - lam) * v2


class TestSolve:
    def test_single_site_exact(self):
        for delta in (UNIT, SQ, TRI):
            n = delta.dim
            x = tuple(F(3, 7) for _ in range(n))
            p = sv.DiracProblem(delta, (x,), (delta.volume,))
            for mode in ("rational", "float"):
                s = sv.solve(p, sv.SolverConfig(mode=mode))
                assert s.potential == tc.envelope(delta, [(x, 0)])
                assert s.residual == 0
                assert s.iterations <= 1

    def test_1d_two_sites_rational_exact(self):
        p = sv.DiracProblem(
            UNIT, ((F(-1, 2),), (F(1, 3),)), (F(1, 4), F(3, 4))
        )
        s = sv.solve(p, sv.SolverConfig(mode="rational"))
        assert s.residual == 0
        assert s.mass_vector() == (F(1, 4), F(3, 4))
        # Slope structure: 0 left of x1, w1 between, 1 right of x2.
        f = s.potential
        eps = F(1, 100)
        x1, x2 = F(-1, 2), F(1, 3)
        left = (f.value((x1,)) - f.value((x1 - eps,))) / eps
        mid = (f.value((x2,)) - f.value((x1,))) / (x2 - x1)
        right = (f.value((x2 + eps,)) - f.value((x2,))) / eps
        assert left == 0
        assert mid == F(1, 4)
        assert right == 1

    def test_1d_random_family_rational(self):
        rng = random.Random(19)
        delta = interval(-1, 2)
        for _ in range(10):
            k = rng.randint(2, 5)
            sites = sorted({F(rng.randint(-8, 8), 3) for _ in range(k)})
            raw = [F(rng.randint(1, 6)) for _ in sites]
            weights = [r * delta.volume / sum(raw) for r in raw]
            weights[-1] = delta.volume - sum(weights[:-1])
            p = sv.DiracProblem(delta, tuple((s,) for s in sites), tuple(weights))
            s = sv.solve(p, sv.SolverConfig(mode="rational"))
            assert s.residual == 0
            assert s.mass_vector() == tuple(weights)

    def test_2d_two_site_split(self):
        p = sv.DiracProblem(SQ, ((F(0), F(0)), (F(1), F(0))), (F(1, 2), F(1, 2)))
        s = sv.solve(p, sv.SolverConfig(mode="float"))
        # Brute-force analysis: the split is the vertical line m1 = 1/2,
        # forced by t2 - t1 = 1/2 along the one-parameter family.
        d = s.t[1] - s.t[0]
        assert abs(float(d) - 0.5) < 1e-8
        assert float(s.residual) <= 1e-10

    def test_2d_float_random_and_uniqueness(self):
        rng = random.Random(23)
        for _ in range(3):
            sites = []
            while len(sites) < 5:
                x = (F(rng.randint(-6, 6), 3), F(rng.randint(-6, 6), 3))
                if x not in sites:
                    sites.append(x)
            raw = [F(rng.randint(1, 9)) for _ in sites]
            weights = [r * SQ.volume / sum(raw) for r in raw]
            weights[-1] = SQ.volume - sum(weights[:-1])
            p = sv.DiracProblem(SQ, tuple(sites), tuple(weights))
            cfg = sv.SolverConfig(mode="float", tol=F(1, 10**10))
            s1 = sv.solve(p, cfg)
            assert float(s1.residual) <= 1e-10
            init2 = tuple(F(1, 2) + ti for ti in s1.t[::-1][: len(sites)])
            init2 = tuple(F(rng.randint(-2, 2), 4) for _ in sites)
            s2 = sv.solve(p, sv.SolverConfig(mode="float", tol=F(1, 10**10), init=init2))
            diffs = [float(a - b) for a, b in zip(s1.t, s2.t)]
            assert max(diffs) - min(diffs) <= 1e-8

    def test_monotone_objective_and_not_converged(self):
        p = sv.DiracProblem(
            SQ,
            ((F(0), F(0)), (F(1), F(0)), (F(1, 3), F(7, 8))),
            (F(1, 2), F(1, 3), F(1, 6)),
        )
        with pytest.raises(NotConverged) as exc:
            sv.solve(p, sv.SolverConfig(mode="rational", max_iter=3))
        best = exc.value.solution
        assert best.residual > 0
        assert len(best.t) == 3
        # The carried best iterate must still be an ascent over the start.
        xbar = p.barycenter()
        t0 = tuple(
            tc.support_value(SQ, (x[0] - xbar[0], x[1] - xbar[1])) for x in p.sites
        )
        v0, _ = sv.dual_objective(p, t0)
        assert best.objective >= v0


class TestOptimality:
    def test_solution_maximizes_over_random_perturbations(self):
        p = sv.DiracProblem(
            SQ,
            ((F(0), F(0)), (F(1), F(0)), (F(1, 2), F(1))),
            (F(1, 4), F(1, 4), F(1, 2)),
        )
        s = sv.normalize(sv.solve(p, sv.SolverConfig(mode="float")))
        v_star, _ = sv.dual_objective(p, s.t)
        rng = random.Random(37)
        eps = F(1, 100)
        for _ in range(100):
            v = [F(rng.randint(-8, 8), 8) for _ in range(3)]
            t2 = tuple(ti + eps * vi for ti, vi in zip(s.t, v))
            val, _ = sv.dual_objective(p, t2)
            assert val <= v_star


class TestNormalize:
    def test_shift_inverse_and_mass_invariance(self):
        p = sv.DiracProblem(SQ, ((F(0), F(0)), (F(1), F(0))), (F(1, 2), F(1, 2)))
        s = sv.solve(p, sv.SolverConfig(mode="float"))
        ns = sv.normalize(s)
        assert max(ns.potential.value(x) for x in p.sites) == 0
        assert sv.normalize(ns).t == ns.t
        assert ns.masses == s.masses
        shifted = sv.Solution(
            problem=s.problem,
            t=tuple(ti + 5 for ti in ns.t),
            potential=tc.envelope(SQ, list(zip(p.sites, (ti + 5 for ti in ns.t)))),
            masses=s.masses,
            residual=s.residual,
            iterations=s.iterations,
            objective=s.objective,
        )
        assert sv.normalize(shifted).t == ns.t


class TestClMeasure:
    def test_factor_matches_dimension(self):
        f2 = tc.g_delta(SQ)
        cl = sv.cl_measure(f2)
        assert cl.total_mass == 2 * SQ.volume
        f1 = tc.g_delta(UNIT)
        assert sv.cl_measure(f1) == tc.ma_measure(f1)

    def test_g_delta_dirac(self):
        cl = sv.cl_measure(tc.g_delta(SQ))
        assert cl.atoms == (((F(0), F(0)), F(2)),)
