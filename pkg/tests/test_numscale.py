import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stratcheck.expr import EXTENDED, eval_jet, parse
from stratcheck.numscale import (
    DomainError,
    XScalar,
    from_float,
    from_log,
    to_float,
    to_float_saturating,
    xexp,
    xln,
    xnorm,
    xpow_int,
    xsqrt,
)

nonzero = st.floats(min_value=1e-30, max_value=1e30).flatmap(lambda m: st.sampled_from([m, -m]))
logs = st.floats(min_value=-1e6, max_value=1e6)


def test_log_quotient():
    assert to_float(from_log(1, -1000) / from_log(1, -999)) == pytest.approx(math.exp(-1), rel=1e-12)


def test_equal_terms_add_ln2():
    s = from_log(1, -5000) + from_log(1, -5000)
    assert s.sign == 1
    assert s.logmag == pytest.approx(-5000 + math.log(2), abs=1e-12)


def test_flat_identity_exact():
    # x^2 ln z with z = exp(-C/x^2) is exactly -C
    x, C = 0.01, 1.0
    z = from_log(1, -C / x**2)
    v = eval_jet(parse("x^2*ln(z)"), {"x": x, "z": z}, EXTENDED).value
    assert to_float(v) == pytest.approx(-C, rel=1e-14)


def test_underflowing_values_stay_representable():
    z = from_log(1, -1e7)
    assert z.sign == 1 and to_float(z) == 0.0
    assert (z * z).logmag == -2e7


def test_cancellation_gives_exact_zero():
    a = from_float(0.1)
    assert (a - a).sign == 0
    assert (a + (-a)) == 0


def test_domain_errors():
    with pytest.raises(DomainError):
        xln(from_float(-1.0))
    with pytest.raises(DomainError):
        xsqrt(from_float(-4.0))
    with pytest.raises(ZeroDivisionError):
        from_float(1.0) / XScalar(0)


def test_saturation():
    assert to_float_saturating(from_log(1, 1e5)) == 1e300
    assert to_float_saturating(from_log(-1, 1e5)) == -1e300


def test_norm_of_tiny_vector():
    n = xnorm([from_log(1, -3000), from_log(-1, -3000)])
    assert n.logmag == pytest.approx(-3000 + 0.5 * math.log(2), abs=1e-12)


@given(nonzero, nonzero)
def test_mul_div_match_float(a, b):
    assert to_float(from_float(a) * from_float(b)) == pytest.approx(a * b, rel=1e-13)
    assert to_float(from_float(a) / from_float(b)) == pytest.approx(a / b, rel=1e-13)


@given(nonzero, nonzero)
def test_add_matches_float_and_commutes(a, b):
    x, y = from_float(a), from_float(b)
    s1, s2 = x + y, y + x
    assert s1.sign == s2.sign and s1.logmag == s2.logmag
    exact = a + b
    if abs(exact) > 1e-12 * max(abs(a), abs(b)):
        assert to_float(s1) == pytest.approx(exact, rel=1e-9)


@given(logs, logs, logs)
def test_same_sign_add_associative(a, b, c):
    x, y, z = from_log(1, a), from_log(1, b), from_log(1, c)
    assert ((x + y) + z).logmag == pytest.approx((x + (y + z)).logmag, rel=1e-12, abs=1e-12)


@given(logs, st.integers(min_value=-5, max_value=5))
def test_integer_power(l, n):
    assert xpow_int(from_log(-1, l), n).logmag == pytest.approx(n * l, abs=1e-9 * max(1, abs(n * l)))
    assert xpow_int(from_log(-1, l), n).sign == (-1) ** (n % 2)


@given(st.floats(min_value=-700, max_value=700))
def test_exp_ln_roundtrip(v):
    assert to_float(xln(xexp(from_float(v)))) == pytest.approx(v, rel=1e-12, abs=1e-12)


@given(nonzero, nonzero)
def test_ordering_matches_float(a, b):
    assert (from_float(a) < from_float(b)) == (a < b)
