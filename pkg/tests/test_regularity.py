import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratcheck import PairAtPoint, catalog, check_condition
from stratcheck.numscale import from_log, to_float
from stratcheck.probes import FamilyConfig
from stratcheck.regularity import (
    FAILS,
    HOLDS,
    SliceError,
    Tolerances,
    alpha,
    beta,
    kuo_ratio,
    r_profile,
    re_quantity,
    rint_check,
    slice_pair,
    solve_slice,
    verdier_quotient,
)

FLATS_Q2 = FamilyConfig(rays=(), powers=(), flat_q=(2,), sigmas=(), vertical=False, mirror=False)


def g_jet(x, z):
    """Closed-form g = z^(x^2+1) and its partials."""
    g = z ** (x * x + 1)
    return g, 2 * x * math.log(z) * g, (x * x + 1) * z ** (x * x)


def closed_alpha(x, z):
    g, gx, gz = g_jet(x, z)
    return abs(gx) / math.sqrt(gx * gx + 1 + gz * gz)


def closed_beta(x, z):
    g, gx, gz = g_jet(x, z)
    return abs(-g + z * gz) / (math.hypot(g, z) * math.sqrt(gx * gx + 1 + gz * gz))


def closed_kuo(x, z):
    g, _, _ = g_jet(x, z)
    return math.sqrt(x * x + g * g + z * z) * closed_alpha(x, z) / math.hypot(g, z)


def sg_point(x, z):
    return (x, z ** (x * x + 1), z)


def test_alpha_bounded_by_gx(sg_pair):
    x, z = 0.1, 1e-4
    a = to_float(alpha(sg_pair, sg_point(x, z)))
    bound = abs(2 * x * z * math.log(z) * math.exp(x * x * math.log(z)))
    assert bound == pytest.approx(1.84e-4 * 0.9, rel=0.1)
    assert a < bound
    assert a == pytest.approx(closed_alpha(x, z), rel=1e-10)


def test_plane_quantities_vanish(halfplane_pair):
    for y in [(0.1, 0.0, 0.2), (-0.3, 0.0, 1e-5)]:
        assert to_float(alpha(halfplane_pair, y)) == 0.0
        assert to_float(beta(halfplane_pair, y)) == pytest.approx(0.0, abs=1e-15)
        assert to_float(kuo_ratio(halfplane_pair, y)) == 0.0
        assert to_float(verdier_quotient(halfplane_pair, y)) == 0.0
        assert to_float(re_quantity(halfplane_pair, 0.5, y)) == 0.0


def test_beta_closed_form(sg_pair):
    assert to_float(beta(sg_pair, sg_point(0.2, 0.1))) == pytest.approx(closed_beta(0.2, 0.1), rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.45, 0.45).filter(lambda v: abs(v) > 1e-3), st.floats(1e-8, 0.45))
def test_sg_quantities_match_closed_form(x, z):
    S = catalog("Sg")
    P = PairAtPoint(S, ("W", "X"), (0.0, 0.0, 0.0))
    y = sg_point(x, z)
    assert to_float(beta(P, y)) == pytest.approx(closed_beta(x, z), rel=1e-9, abs=1e-15)
    assert to_float(kuo_ratio(P, y)) == pytest.approx(closed_kuo(x, z), rel=1e-9, abs=1e-15)


def test_kuo_ratio_flat_limit(sg_pair):
    # along z = exp(-C/x^2): g/z -> e^-C, g_x ~ -2C g/x, g_z -> e^-C, so R -> 2Ce^-C/(1+e^-2C) = C/cosh C
    v = check_condition(sg_pair, "r")
    assert v.outcome == FAILS and v.witness.startswith("flat C=1")
    P = PairAtPoint(sg_pair.S, ("W", "X"), (0.0, 0.0, 0.0), FLATS_Q2)
    v = check_condition(P, "r")
    lims = {c.label: c.estimate.value for c in v.curves}
    for C in (1.0, 0.5, 2.0):
        assert lims[f"flat C={C:g} q=2"] == pytest.approx(C / math.cosh(C), rel=1e-3)


def test_kuo_ratio_float_regime_matches_oracle(sg_pair):
    x = 0.1
    z = math.exp(-1 / x**2)
    assert to_float(kuo_ratio(sg_pair, sg_point(x, z))) == pytest.approx(closed_kuo(x, z), rel=1e-10)


def test_re_zero_is_verdier(sg_pair):
    for x, z in [(0.1, 1e-3), (-0.2, 0.05)]:
        y = sg_point(x, z)
        a = re_quantity(sg_pair, 0.0, y)
        b = verdier_quotient(sg_pair, y, "pi")
        assert to_float(a) == pytest.approx(to_float(b), rel=1e-12)
    with pytest.raises(ValueError):
        re_quantity(sg_pair, 1.0, sg_point(0.1, 0.1))


def test_sg_verdicts(sg_pair):
    b = check_condition(sg_pair, "b")
    assert b.outcome == HOLDS
    a, bpi = check_condition(sg_pair, "a"), check_condition(sg_pair, "bpi")
    assert a.outcome == HOLDS and bpi.outcome == HOLDS
    w = check_condition(sg_pair, "w")
    assert w.outcome == FAILS and "flat" in w.witness
    re = check_condition(sg_pair, "re(0.5)")
    assert re.outcome == FAILS and "flat" in re.witness


def test_sf_verdicts(sf_pair):
    assert check_condition(sf_pair, "b").outcome == HOLDS
    r = check_condition(sf_pair, "r")
    assert r.outcome == HOLDS
    assert all(c.estimate.value == pytest.approx(0.0, abs=1e-3) for c in r.curves if c.status == "conforming")
    assert check_condition(sf_pair, "w").outcome == FAILS


def test_verdict_invariants(sg_pair, sf_pair, halfplane_pair):
    for P in (sg_pair, sf_pair, halfplane_pair):
        va, vb, vbb = (check_condition(P, c) for c in ("a", "bpi", "b"))
        expect = FAILS if FAILS in (va.outcome, vb.outcome) else (HOLDS if va.outcome == vb.outcome == HOLDS else "INCONCLUSIVE")
        assert vbb.outcome == expect
        for v in (va, vb, vbb, check_condition(P, "r"), check_condition(P, "w")):
            if v.outcome == FAILS:
                assert v.witness


def test_unknown_condition(sg_pair):
    with pytest.raises(ValueError):
        check_condition(sg_pair, "zz")


def test_tolerance_override(sg_pair):
    # with a loose tolerance the C=2 limit 0.53 still counts as a witness; with tol=1 it conforms
    P = PairAtPoint(sg_pair.S, ("W", "X"), (0.0, 0.0, 0.0), FLATS_Q2)
    assert check_condition(P, "r", tolerances=Tolerances(tol=1.0)).outcome == HOLDS


def test_r_profile_examples(halfplane_pair, z3_pair, sg_pair):
    assert r_profile(halfplane_pair, 0.05).value == 0.0
    vals = [r_profile(z3_pair, t).value for t in (0.1, 0.01, 0.001)]
    assert max(vals) < 1.0
    sg = [r_profile(sg_pair, t).value for t in (0.1, 0.01, 0.001)]
    assert sg[0] < sg[1] < sg[2] and sg[2] > 100


def test_r_profile_matches_brute_sup(sg_pair):
    # brute force over a dense float grid of z at x = t, both signs of x
    t = 0.1
    zs = np.exp(-np.geomspace(0.9, 700, 4000))
    brute = max(closed_alpha(t, z) / math.hypot(z ** (t * t + 1), z) for z in zs)
    assert r_profile(sg_pair, t).value == pytest.approx(brute, rel=1e-3)


def test_rint_synthetic():
    r = rint_check(profile=lambda t: 0.0)
    assert r.kind == "converging" and r.value == 0.0
    assert rint_check(profile=lambda t: 1 / t).kind == "diverging"
    assert rint_check(profile=lambda t: t).kind == "converging"
    with pytest.raises(ValueError):
        rint_check(profile=lambda t: 0.0, eps_grid=[0.1, 0.05])


def test_slice_closed_form(sg_pair):
    sp = slice_pair(sg_pair, 0.5)
    assert sp.roots and not sp.errors
    for x, L in sp.roots.items():
        exact = math.log(0.5) / x**2
        assert L == pytest.approx(exact, rel=1e-9)
        if abs(x) >= 0.03:
            assert abs(L - exact) < 1e-9


def test_solve_slice_residual():
    Y = catalog("Sg")["W"]
    L = solve_slice(Y, 0.5, 0.1)
    assert L == pytest.approx(math.log(0.5) / 0.01, rel=1e-12)
    z = from_log(1, L)
    assert to_float(Y.expr(scalar_system="extended", x=0.1, z=z) / z) == pytest.approx(0.5, rel=1e-10)


def test_sliced_b_fails(sg_pair):
    v = check_condition(slice_pair(sg_pair, 0.5), "b")
    assert v.outcome == FAILS
    assert check_condition(slice_pair(sg_pair, 0.5), "a").outcome == HOLDS


def test_slice_of_plane_reports_no_root(halfplane_pair):
    sp = slice_pair(halfplane_pair, 0.5)
    assert not sp.roots
    assert sp.errors and all("no root" in e for e in sp.errors)
    with pytest.raises(SliceError):
        solve_slice(halfplane_pair.Y, 0.5, 0.1)
