"""Toric potential tests: envelopes, measures, duality, energy."""

import random
from fractions import Fraction as F

import pytest

from nama import polyhedra as pg
from nama import toric as tc
from nama.errors import DeltaMismatch, EmptyLattice, NotDominated, WrongArity


def interval(a, b):
    return tc.newton_polytope([(a,), (b,)], 1)


def square(side=1):
    return tc.newton_polytope([(0, 0), (side, 0), (side, side), (0, side)], 2)


def triangle():
    return tc.newton_polytope([(0, 0), (1, 0), (0, 1)], 2)


UNIT = interval(0, 1)
SQ = square()
TRI = triangle()


class TestSupportValue:
    def test_interval(self):
        assert tc.support_value(UNIT, (-2,)) == 0
        assert tc.support_value(UNIT, (3,)) == 3

    def test_square(self):
        assert tc.support_value(SQ, (2, -1)) == 2

    def test_triangle(self):
        assert tc.support_value(TRI, (3, 5)) == 5


class TestEnvelope:
    def test_single_constraint_is_translated_support_function(self):
        for delta, x in [(UNIT, (F(1, 3),)), (SQ, (F(1, 2), F(-1, 4))), (TRI, (0, 2))]:
            f = tc.envelope(delta, [(x, 0)])
            rng = random.Random(1)
            for _ in range(25):
                y = tuple(F(rng.randint(-8, 8), 4) for _ in range(delta.dim))
                shifted = tuple(a - F(b) for a, b in zip(y, x))
                assert f.value(y) == tc.support_value(delta, shifted)

    def test_g_delta_on_interval(self):
        f = tc.g_delta(UNIT)
        assert f.value((-3,)) == 0
        assert f.value((2,)) == 2

    def test_two_sites_one_pruned(self):
        f = tc.envelope(UNIT, [((0,), 0), ((1,), 0)])
        # The site at 0 has a zero-length cell; only the site at 1 carries mass.
        assert f.sites == ((F(1),),)
        assert f.value((F(1, 2),)) == 0
        assert f.value((3,)) == 2

    def test_interpolation_invariant(self):
        f = tc.envelope(SQ, [((0, 0), 0), ((2, 0), F(1, 2)), ((0, 2), F(1, 2))])
        for x, t in f.generators:
            assert f.value(x) == t

    def test_against_dense_affine_minorant_oracle(self):
        delta = UNIT
        f = tc.envelope(delta, [((F(-1),), F(0)), ((F(1),), F(-1, 2))])
        rng = random.Random(5)
        grid = [F(k, 100) for k in range(101)]
        for _ in range(40):
            y = (F(rng.randint(-12, 12), 3),)
            # u(m) = max(<x,m> - t) over constraints x=-1,t=0 and x=1,t=-1/2
            dense = max(m * y[0] - max(-m, m + F(1, 2)) for m in grid)
            assert f.value(y) >= dense
            # Lipschitz gap of the grid approximation: slopes within 1/100.
            assert f.value(y) - dense <= F(1, 100) * abs(y[0]) + F(1, 100)


class TestPshEnvelope:
    def test_identity_on_convex_branch(self):
        f = tc.envelope(SQ, [((0, 0), 0), ((1, 1), F(1, 3))])
        tf = tc.TestFunction([f])
        assert tc.psh_envelope(tf) == f

    def test_dominating_branch_dropped(self):
        g = tc.g_delta(UNIT)
        high = tc.envelope(UNIT, [((F(1, 2),), F(10))])
        tf = tc.TestFunction([g, high])
        env = tc.psh_envelope(tf)
        assert env == g

    def test_below_and_contact(self):
        b1 = tc.g_delta(SQ).shift(F(1, 2))
        b2 = tc.envelope(SQ, [((1, 0), 0)])
        tf = tc.TestFunction([b1, b2])
        env = tc.psh_envelope(tf)
        rng = random.Random(9)
        for _ in range(50):
            y = (F(rng.randint(-6, 6), 2), F(rng.randint(-6, 6), 2))
            assert env.value(y) <= tf.value(y)
        assert any(env.value(x) == tf.value(x) for x in env.sites)


class TestPieces:
    def test_g_delta_pieces(self):
        assert tc.g_delta(UNIT).pieces == (((F(0),), F(0)), ((F(1),), F(0)))

    def test_translate_pieces(self):
        x = (F(1, 3),)
        f = tc.envelope(UNIT, [(x, 0)])
        assert f.pieces == (((F(0),), F(0)), ((F(1),), F(1, 3)))

    def test_to_pieces_intercepts(self):
        x = (F(1, 3),)
        f = tc.envelope(UNIT, [(x, 0)])
        assert tc.to_pieces(tc.g_delta(UNIT)) == (((F(0),), F(0)), ((F(1),), F(0)))
        assert tc.to_pieces(f) == (((F(0),), F(0)), ((F(1),), F(-1, 3)))

    def test_to_pieces_self_consistency(self):
        rng = random.Random(8)
        f = tc.envelope(
            SQ,
            [
                ((F(rng.randint(-4, 4), 2), F(rng.randint(-4, 4), 2)), F(rng.randint(-4, 4), 3))
                for _ in range(4)
            ],
        )
        pieces = tc.to_pieces(f)
        for _ in range(100):
            y = (F(rng.randint(-9, 9), 2), F(rng.randint(-9, 9), 2))
            assert f.value(y) == max(pg.dot(v, y) + c for v, c in pieces)

    def test_max_over_pieces_matches_value(self):
        rng = random.Random(3)
        f = tc.envelope(
            SQ, [((F(rng.randint(-4, 4), 2), F(rng.randint(-4, 4), 2)), F(rng.randint(-4, 4), 3)) for _ in range(5)]
        )
        for _ in range(100):
            y = (F(rng.randint(-9, 9), 2), F(rng.randint(-9, 9), 2))
            assert f.value(y) == max(pg.dot(v, y) - uv for v, uv in f.pieces)


class TestMaxCombine:
    def test_idempotent(self):
        f = tc.envelope(SQ, [((0, 0), 0), ((1, 1), 1)])
        assert tc.max_combine(f, f) == f

    def test_absorbs_lower_constant(self):
        f = tc.envelope(SQ, [((0, 0), 0), ((1, 1), 1)])
        assert tc.max_combine(f, f.shift(-1)) == f

    def test_pointwise_max(self):
        rng = random.Random(17)
        for delta in (UNIT, SQ):
            n = delta.dim
            mk = lambda: tc.envelope(
                delta,
                [
                    (tuple(F(rng.randint(-4, 4), 2) for _ in range(n)), F(rng.randint(-3, 3), 2))
                    for _ in range(3)
                ],
            )
            f, g = mk(), mk()
            h = tc.max_combine(f, g)
            for _ in range(100):
                y = tuple(F(rng.randint(-9, 9), 2) for _ in range(n))
                assert h.value(y) == max(f.value(y), g.value(y))

    def test_delta_mismatch(self):
        with pytest.raises(DeltaMismatch):
            tc.max_combine(tc.g_delta(SQ), tc.g_delta(TRI))


class TestMaMeasure:
    def test_g_delta_dirac_at_origin(self):
        for delta in (UNIT, SQ, TRI, square(3)):
            mu = tc.ma_measure(tc.g_delta(delta))
            origin = tuple(F(0) for _ in range(delta.dim))
            assert mu.atoms == ((origin, delta.volume),)

    def test_translate_dirac(self):
        x = (F(2, 3), F(-1, 2))
        mu = tc.ma_measure(tc.envelope(SQ, [(x, 0)]))
        assert mu.atoms == ((x, F(1)),)

    def test_1d_slope_jump_oracle(self):
        rng = random.Random(29)
        for _ in range(20):
            sites = sorted({F(rng.randint(-6, 6), 2) for _ in range(4)})
            gens = [((s,), F(rng.randint(-4, 4), 3)) for s in sites]
            f = tc.envelope(UNIT, gens)
            mu = tc.ma_measure(f)
            # Slope-jump oracle: one-sided exact slopes around each atom.
            eps = F(1, 10**6)
            for (p, w) in mu.atoms:
                left = (f.value((p[0],)) - f.value((p[0] - eps,))) / eps
                right = (f.value((p[0] + eps,)) - f.value((p[0],))) / eps
                assert right - left == w

    def test_mass_conservation_random(self):
        rng = random.Random(31)
        for delta in (UNIT, SQ, TRI):
            n = delta.dim
            for _ in range(15):
                gens = [
                    (tuple(F(rng.randint(-8, 8), 4) for _ in range(n)), F(rng.randint(-6, 6), 4))
                    for _ in range(5)
                ]
                f = tc.envelope(delta, gens)
                assert tc.ma_measure(f).total_mass == delta.volume


class TestMixedMa:
    def test_equal_arguments(self):
        f = tc.envelope(SQ, [((0, 0), 0), ((1, 0), F(1, 2))])
        assert tc.mixed_ma([f, f]) == tc.ma_measure(f)

    def test_symmetry(self):
        f = tc.envelope(SQ, [((0, 0), 0), ((1, 0), F(1, 2))])
        g = tc.envelope(SQ, [((0, 1), 0), ((-1, 0), F(1, 3))])
        assert tc.mixed_ma([f, g]) == tc.mixed_ma([g, f])

    def test_wrong_arity(self):
        f = tc.g_delta(SQ)
        with pytest.raises(WrongArity):
            tc.mixed_ma([f])

    def test_against_mixed_volume_oracle(self):
        """Atom weights are mixed volumes V(A,B) = (vol(A+B)-vol(A)-vol(B))/2
        of the subdifferential cells, computed independently."""
        rng = random.Random(41)
        for _ in range(8):
            mk = lambda: tc.envelope(
                SQ,
                [
                    (tuple(F(rng.randint(-4, 4), 2) for _ in range(2)), F(rng.randint(-3, 3), 2))
                    for _ in range(3)
                ],
            )
            f, g = mk(), mk()
            mixed = tc.mixed_ma([f, g])
            for p, w in mixed.atoms:
                A = f.subdifferential(p)
                B = g.subdifferential(p)
                volsum = pg.volume(pg.minkowski_sum(A, B))
                oracle = (volsum - pg.volume(A) - pg.volume(B)) / 2
                assert w == oracle

    def test_gdelta_pair_on_square(self):
        f = tc.g_delta(SQ)
        g = tc.envelope(SQ, [((1, 0), 0)])
        mixed = tc.mixed_ma([f, g])
        assert mixed.total_mass == 1
        # Subdifferentials are the full square at each site; the mixed mass
        # splits between the two sites by mixed volumes of square vs point.
        assert set(mixed.points()) <= {(F(0), F(0)), (F(1), F(0))}


class TestEnergy:
    def test_zero_at_reference(self):
        ref = tc.g_delta(SQ)
        assert tc.energy(ref, ref) == 0

    def test_constant_shift(self):
        ref = tc.g_delta(SQ)
        f = tc.envelope(SQ, [((1, 1), F(1, 2)), ((0, 0), 0)])
        c = F(7, 3)
        assert tc.energy(f.shift(c), ref) == tc.energy(f, ref) + c * SQ.volume

    def test_legendre_identity_1d(self):
        ref = tc.g_delta(UNIT)
        x = (F(2, 5),)
        f = tc.envelope(UNIT, [(x, 0)])
        # Independent closed form: integral of (0 - x*m) over [0,1].
        assert tc.energy(f, ref) == -x[0] / 2
        assert tc.energy_via_mixed(f, ref) == -x[0] / 2

    def test_mixed_equals_legendre_random(self):
        rng = random.Random(43)
        for delta in (UNIT, SQ, TRI):
            n = delta.dim
            ref = tc.g_delta(delta)
            for _ in range(8):
                gens = [
                    (tuple(F(rng.randint(-4, 4), 2) for _ in range(n)), F(rng.randint(-3, 3), 2))
                    for _ in range(3)
                ]
                f = tc.envelope(delta, gens)
                assert tc.legendre_energy(f, ref) == tc.energy_via_mixed(f, ref)


class TestIntegrate:
    def test_constant_shift_integrates_to_mass(self):
        mu = tc.AtomicMeasure.from_items([((F(0), F(0)), F(2)), ((F(1), F(1)), F(3))])
        f = tc.envelope(SQ, [((0, 0), 0), ((1, 1), 1)])
        assert tc.integrate(f.shift(F(5)), mu) - tc.integrate(f, mu) == 5 * mu.total_mass

    def test_dirac(self):
        f = tc.envelope(SQ, [((0, 0), 0), ((1, 1), 1)])
        x = (F(1, 3), F(2, 3))
        mu = tc.AtomicMeasure.from_items([(x, F(1))])
        assert tc.integrate(f, mu) == f.value(x)

    def test_reevaluation_oracle(self):
        rng = random.Random(47)
        f = tc.envelope(SQ, [((0, 0), 0), ((1, 0), F(1, 2)), ((0, 1), F(-1, 3))])
        atoms = [
            ((F(rng.randint(-4, 4), 3), F(rng.randint(-4, 4), 3)), F(rng.randint(1, 5), 2))
            for _ in range(6)
        ]
        mu = tc.AtomicMeasure.from_items(atoms)
        expected = sum(w * f.value(p) for p, w in mu.atoms)
        assert tc.integrate(f, mu) == expected


class TestLatticeEnvelope:
    def test_interval_m1_exact(self):
        x = (F(1, 3),)
        constraints = [(x, 0)]
        exact = tc.envelope(UNIT, constraints)
        lat = tc.lattice_envelope(UNIT, constraints, 1)
        assert lat == exact  # slopes {0,1} already realize the envelope

    def test_below_exact_envelope(self):
        rng = random.Random(53)
        constraints = [((F(rng.randint(-4, 4), 4), F(rng.randint(-4, 4), 4)), F(rng.randint(-2, 2), 3)) for _ in range(3)]
        exact = tc.envelope(SQ, constraints)
        for m in (1, 2, 4):
            lat = tc.lattice_envelope(SQ, constraints, m)
            for _ in range(100):
                y = (F(rng.randint(-8, 8), 2), F(rng.randint(-8, 8), 2))
                assert lat.value(y) <= exact.value(y)

    def test_refinement_monotone(self):
        rng = random.Random(59)
        constraints = [((F(1, 3), F(-1, 5)), F(0)), ((F(-1, 2), F(1, 2)), F(1, 4))]
        prev = None
        for m in (1, 2, 4, 8):
            lat = tc.lattice_envelope(SQ, constraints, m)
            if prev is not None:
                for _ in range(60):
                    y = (F(rng.randint(-8, 8), 2), F(rng.randint(-8, 8), 2))
                    assert prev.value(y) <= lat.value(y)
            prev = lat

    def test_empty_lattice(self):
        small = tc.newton_polytope([(F(1, 3),), (F(2, 5),)], 1)
        with pytest.raises(EmptyLattice):
            tc.lattice_envelope(small, [((0,), 0)], 1)

    def test_degenerate_lattice_span_rejected(self):
        thin = tc.newton_polytope([(0, 0), (F(1, 2), 0), (0, F(1, 2))], 2)
        with pytest.raises(EmptyLattice):
            tc.lattice_envelope(thin, [((0, 0), 0)], 1)

    def test_proper_sublattice_hull_shrinks_delta(self):
        delta = tc.newton_polytope([(0, 0), (F(3, 2), 0), (0, 1)], 2)
        lat = tc.lattice_envelope(delta, [((F(1, 4), F(1, 4)), 0)], 1)
        # The 1-lattice points of Delta span only the unit corner triangle,
        # so the restricted envelope lives over that smaller polytope.
        assert lat.delta != delta
        assert lat.delta.volume == F(1, 2)
        assert tc.ma_measure(lat).total_mass == F(1, 2)


class TestOrthogonalityDefect:
    def test_envelope_has_zero_defect(self):
        rng = random.Random(61)
        for delta in (UNIT, SQ):
            n = delta.dim
            mk = lambda: tc.envelope(
                delta,
                [
                    (tuple(F(rng.randint(-4, 4), 2) for _ in range(n)), F(rng.randint(-3, 3), 2))
                    for _ in range(3)
                ],
            )
            tf = tc.TestFunction([mk(), mk()])
            env = tc.psh_envelope(tf)
            assert tc.orthogonality_defect(tf, env) == 0

    def test_constant_shift_defect(self):
        tf = tc.TestFunction([tc.g_delta(SQ), tc.envelope(SQ, [((1, 0), 0)])])
        env = tc.psh_envelope(tf)
        c = F(3, 7)
        assert tc.orthogonality_defect(tf, env.shift(-c)) == c * SQ.volume

    def test_not_dominated(self):
        tf = tc.TestFunction([tc.g_delta(SQ)])
        env = tc.psh_envelope(tf)
        with pytest.raises(NotDominated):
            tc.orthogonality_defect(tf, env.shift(F(1)))

    def test_lattice_defect_ladder_2d(self):
        delta = tc.newton_polytope([(0, 0), (2, 0), (0, 2)], 2)
        constraints = [((F(1, 3), F(-1, 5)), F(0)), ((F(-1, 2), F(1, 2)), F(1, 4))]
        tf = tc.TestFunction([tc.envelope(delta, [c]) for c in constraints])
        defects = []
        for m in (1, 2, 4, 8):
            lat = tc.lattice_envelope(delta, constraints, m)
            d = tc.orthogonality_defect(tf, lat)
            assert d >= 0
            defects.append(d)
        assert defects[-1] <= defects[0]
        assert defects[-1] < defects[1] or defects[-1] == 0

    def test_lattice_defect_ladder_1d(self):
        delta = interval(0, 2)
        constraints = [((F(1, 3),), F(0)), ((F(-2, 3),), F(1, 5))]
        tf = tc.TestFunction(
            [tc.envelope(delta, [c]) for c in constraints]
        )
        exact = tc.psh_envelope(tf)
        defects = []
        for m in (1, 2, 4, 8, 16):
            lat = tc.lattice_envelope(delta, constraints, m)
            d = tc.orthogonality_defect(tf, lat)
            assert d >= 0
            defects.append(d)
        assert defects[-1] <= defects[0] / 8
        assert tc.orthogonality_defect(tf, exact) == 0
