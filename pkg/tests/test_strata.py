import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stratcheck import PairAtPoint, Retraction, catalog, project, sample_fiber, theta
from stratcheck.density import MCConfig
from stratcheck.numscale import to_float
from stratcheck.strata import CATALOG_NAMES, CatalogError, EmptyFiberError, StratifiedSet


def test_catalog_sg_shape():
    S = catalog("Sg")
    assert S.pairs == (("W", "X"),)
    assert S.ambient_dim == 3 and S["W"].dim == 2 and S["X"].dim == 1


def test_catalog_all_names_resolve():
    for name in CATALOG_NAMES:
        S = catalog(name)
        for y, x in S.pairs:
            assert S[x].dim < S[y].dim or not S.frontier
    assert not catalog("sine_curve_demo").frontier
    with pytest.raises(CatalogError):
        catalog("nope")


def test_kg_region_slice():
    K = catalog("Kg")["K"]
    assert K.dim == 3 and K.bounded == "y" and K.lower == 0.0
    g = K.expr(x=0.2, z=0.3)
    assert g == pytest.approx(0.3 ** 1.04)


def test_bad_pair_rejected():
    S = catalog("Sg")
    with pytest.raises(ValueError):
        StratifiedSet("bad", 3, dict(S.strata), (("X", "W"),))


def test_halfplane_boundary_density():
    S = catalog("halfplane")
    est = theta(S["Y"], (0.2, 0.0, 0.0), mc=MCConfig(N=100_000))
    assert est.theta == pytest.approx(0.5, abs=0.01)


def test_projection_examples():
    pi = Retraction(catalog("Sg")["X"])
    assert project(pi, (0.3, 0.1, 0.2)) == pytest.approx([0.3, 0, 0])
    assert project(pi, (0.3, 0, 0)) == pytest.approx([0.3, 0, 0])
    p = (0.3, 0.1, 0.2)
    q = project(pi, p)
    assert math.dist(p, q) == pytest.approx(math.hypot(0.1, 0.2))


coord = st.floats(-10, 10)


@given(coord, coord, coord)
def test_projection_idempotent_and_orthogonal(a, b, c):
    pi = Retraction(catalog("Sg")["X"])
    q = project(pi, (a, b, c))
    assert project(pi, q) == pytest.approx(q)
    r = [u - v for u, v in zip((a, b, c), q)]
    assert r[0] == pytest.approx(0.0, abs=1e-12)


def test_fiber_sg_origin_is_diagonal():
    S = catalog("Sg")
    pts = sample_fiber(S, "W", (0, 0, 0), 0.1)
    assert len(pts) == 41
    for x, y, z in pts:
        assert x == 0 and y == pytest.approx(z, rel=1e-15)


def test_fiber_sg_half_flattens():
    S = catalog("Sg")
    pts = sample_fiber(S, "W", (0.5, 0, 0), 0.1)
    ratios = [y / z for _, y, z in pts]
    # oracle: y/z = z^0.25
    for (_, y, z), r in zip(pts, ratios):
        assert r == pytest.approx(z**0.25, rel=1e-12)
    assert ratios[-1] < 1e-2 < ratios[0]


def test_fiber_deep_sampling():
    S = catalog("Sg")
    pts = sample_fiber(S, "W", (0.5, 0, 0), 0.1, count=20, depth=1e6)
    z = pts[-1][2]
    assert z.logmag == pytest.approx(-1e6)
    assert to_float(pts[-1][1] / z) == 0.0  # z^0.25 underflows


def test_fiber_halfplane():
    pts = sample_fiber(catalog("halfplane"), "Y", (0.25, 0, 0), 0.1)
    assert all(p[0] == 0.25 and p[1] == 0 for p in pts)


def test_fiber_errors():
    S = catalog("Kg")
    with pytest.raises(EmptyFiberError):
        sample_fiber(S, "K", (0, 0, 0), 0.1)
    with pytest.raises(EmptyFiberError):
        sample_fiber(catalog("Sg"), "W", (0.9, 0, 0), 0.1)


def test_pair_validation():
    S = catalog("Sg")
    with pytest.raises(ValueError):
        PairAtPoint(S, ("W", "X"), (0, 0.1, 0))
    with pytest.raises(ValueError):
        PairAtPoint(S, ("X", "W"), (0, 0, 0))
