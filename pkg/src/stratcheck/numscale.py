"""Extended-range signed scalars.

An :class:`XScalar` stores a real number as ``sign * exp(logmag)``.  Products
and quotients act on ``logmag`` additively, so values such as
``exp(-1e7)`` stay representable long after a double has underflowed.
"""

from __future__ import annotations

import math

__all__ = [
    "XScalar",
    "DomainError",
    "from_log",
    "from_float",
    "to_float",
    "to_float_saturating",
    "xsqrt",
    "xexp",
    "xln",
    "xabs",
    "xsin",
    "xpow_int",
    "xnorm",
    "CANCEL_REL",
]

# opposite-sign sums whose relative residue falls below this become exact zero
CANCEL_REL = 1e-14

_FLOAT_LOG_MAX = math.log(1.7976931348623157e308)


class DomainError(ValueError):
    """Invalid operation on the represented reals (ln of nonpositive, 1/0, ...)."""


class XScalar:
    __slots__ = ("sign", "logmag")

    def __init__(self, sign: int, logmag: float = 0.0):
        if sign == 0:
            logmag = 0.0
        elif sign not in (1, -1):
            raise ValueError(f"sign must be -1, 0 or +1, got {sign!r}")
        elif math.isnan(logmag) or logmag == math.inf:
            raise DomainError(f"logmag must be finite, got {logmag!r}")
        elif logmag == -math.inf:
            sign, logmag = 0, 0.0
        self.sign = sign
        self.logmag = float(logmag)

    # -- construction helpers -------------------------------------------------
    @staticmethod
    def coerce(v) -> "XScalar":
        if isinstance(v, XScalar):
            return v
        return from_float(v)

    def __repr__(self):
        if self.sign == 0:
            return "XScalar(0)"
        return f"XScalar({self.sign:+d}, {self.logmag!r})"

    def __float__(self):
        return to_float(self)

    def __bool__(self):
        return self.sign != 0

    def __hash__(self):
        return hash((self.sign, self.logmag))

    # -- arithmetic -----------------------------------------------------------
    def __neg__(self):
        return XScalar(-self.sign, self.logmag)

    def __pos__(self):
        return self

    def __abs__(self):
        return XScalar(abs(self.sign), self.logmag)

    def __mul__(self, other):
        o = XScalar.coerce(other)
        if self.sign == 0 or o.sign == 0:
            return _ZERO
        return XScalar(self.sign * o.sign, self.logmag + o.logmag)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = XScalar.coerce(other)
        if o.sign == 0:
            raise ZeroDivisionError("XScalar division by zero")
        if self.sign == 0:
            return _ZERO
        return XScalar(self.sign * o.sign, self.logmag - o.logmag)

    def __rtruediv__(self, other):
        return XScalar.coerce(other) / self

    def __add__(self, other):
        o = XScalar.coerce(other)
        if o.sign == 0:
            return self
        if self.sign == 0:
            return o
        # order so that a has the larger magnitude; ties broken by sign so
        # that a + b and b + a run the identical float sequence
        if (self.logmag, self.sign) >= (o.logmag, o.sign):
            a, b = self, o
        else:
            a, b = o, self
        d = b.logmag - a.logmag  # <= 0
        if a.sign == b.sign:
            return XScalar(a.sign, a.logmag + math.log1p(math.exp(d)))
        residue = -math.expm1(d)
        if residue < CANCEL_REL:
            return _ZERO
        return XScalar(a.sign, a.logmag + math.log(residue))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-XScalar.coerce(other))

    def __rsub__(self, other):
        return XScalar.coerce(other) + (-self)

    def __pow__(self, other):
        if isinstance(other, int) or (isinstance(other, float) and other.is_integer()):
            return xpow_int(self, int(other))
        o = XScalar.coerce(other)
        return xexp(o * xln(self))

    # -- ordering -------------------------------------------------------------
    def _key(self):
        if self.sign == 0:
            return (0, 0.0)
        return (self.sign, self.sign * self.logmag)

    def cmp(self, other) -> int:
        a, b = self._key(), XScalar.coerce(other)._key()
        return (a > b) - (a < b)

    def __eq__(self, other):
        if not isinstance(other, (XScalar, int, float)):
            return NotImplemented
        return self.cmp(other) == 0

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0


_ZERO = XScalar(0)


def from_log(sign: int, logmag: float) -> XScalar:
    return XScalar(sign, logmag)


def from_float(v: float) -> XScalar:
    v = float(v)
    if math.isnan(v) or math.isinf(v):
        raise DomainError(f"cannot represent {v!r}")
    if v == 0.0:
        return _ZERO
    return XScalar(1 if v > 0 else -1, math.log(abs(v)))


def to_float(x: XScalar) -> float:
    """Convert to a double; raises OverflowError past the double range."""
    if x.sign == 0:
        return 0.0
    if x.logmag > _FLOAT_LOG_MAX:
        raise OverflowError(f"{x!r} exceeds the double range")
    return x.sign * math.exp(x.logmag)


def to_float_saturating(x, cap: float = 1e300) -> float:
    """Like :func:`to_float` but clamps magnitudes above ``cap``."""
    if not isinstance(x, XScalar):
        v = float(x)
        return max(-cap, min(cap, v))
    if x.sign == 0:
        return 0.0
    if x.logmag > math.log(cap):
        return x.sign * cap
    return x.sign * math.exp(x.logmag)


def xabs(x: XScalar) -> XScalar:
    return abs(x)


def xsqrt(x: XScalar) -> XScalar:
    if x.sign < 0:
        raise DomainError("sqrt of negative XScalar")
    if x.sign == 0:
        return _ZERO
    return XScalar(1, 0.5 * x.logmag)


def xln(x: XScalar) -> XScalar:
    if x.sign <= 0:
        raise DomainError("ln of nonpositive XScalar")
    return from_float(x.logmag)


def xexp(x: XScalar) -> XScalar:
    v = to_float(x)  # exponents beyond the double range are not meaningful here
    return XScalar(1, v)


def xsin(x: XScalar) -> XScalar:
    if x.sign == 0:
        return _ZERO
    if x.logmag < -20.0:
        return x  # sin(v) = v to double precision
    return from_float(math.sin(to_float(x)))


def xpow_int(x: XScalar, n: int) -> XScalar:
    if n == 0:
        return XScalar(1, 0.0)
    if x.sign == 0:
        if n < 0:
            raise ZeroDivisionError("zero to a negative power")
        return _ZERO
    sign = x.sign if n % 2 else 1
    return XScalar(sign, n * x.logmag)


def xnorm(vec) -> XScalar:
    """Euclidean norm as m*sqrt(sum((v/m)^2)) with m = max|v|."""
    xs = [XScalar.coerce(v) for v in vec]
    nz = [v for v in xs if v.sign != 0]
    if not nz:
        return _ZERO
    m = max(abs(v) for v in nz)
    s = _ZERO
    for v in nz:
        r = v / m
        s = s + r * r
    return m * xsqrt(s)
