"""Float-only n=3 mode: sanity within loose tolerances."""

import pytest

from nama import approx
from nama.errors import DimensionUnsupported

CUBE = [(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)]


def test_cube_volume():
    p = approx.hull3(CUBE)
    assert abs(p.volume - 1.0) < 1e-9
    assert len(p.vertices) == 8


def test_interior_point_dropped():
    p = approx.hull3(CUBE + [(0.5, 0.5, 0.5)])
    assert len(p.vertices) == 8


def test_clip_half():
    p = approx.hull3(CUBE)
    c = approx.clip3(p, [((1.0, 0.0, 0.0), 0.5)])
    assert abs(c.volume - 0.5) < 1e-9


def test_clip_empty():
    p = approx.hull3(CUBE)
    c = approx.clip3(p, [((1.0, 0.0, 0.0), -1.0)])
    assert c.is_empty


def test_minkowski_doubling():
    p = approx.hull3(CUBE)
    s = approx.minkowski3(p, p)
    assert abs(s.volume - 8.0) < 1e-8


def test_dimension_guard():
    with pytest.raises(DimensionUnsupported):
        approx.hull3([(0.0, 0.0)])


def test_exact_kernel_rejects_n4():
    from nama import polyhedra as pg

    with pytest.raises(DimensionUnsupported):
        pg.hull([(0, 0, 0, 0), (1, 0, 0, 0)], 4)
