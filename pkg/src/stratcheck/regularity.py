"""Pointwise regularity quantities and per-condition verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .expr import EXTENDED, EvalDomainError, eval_jet
from .geom import Subspace, delta, eta, norm, orthonormalize, unit
from .numscale import DomainError, XScalar, to_float_saturating
from .probes import (
    BOUNDED,
    CONVERGED,
    DIVERGING,
    MIN_SAMPLES,
    FamilyConfig,
    TooFewSamplesError,
    classify_limit,
    standard_family,
)
from .strata import Retraction, StratifiedSet

__all__ = [
    "PairAtPoint",
    "SlicedPair",
    "SliceError",
    "PointGeom",
    "Tolerances",
    "CurveResult",
    "Verdict",
    "HOLDS",
    "FAILS",
    "INCONCLUSIVE",
    "alpha",
    "beta",
    "kuo_ratio",
    "verdier_quotient",
    "re_quantity",
    "r_profile",
    "RProfile",
    "rint_check",
    "RintResult",
    "check_condition",
    "slice_pair",
    "solve_slice",
    "CONDITIONS",
]

HOLDS, FAILS, INCONCLUSIVE = "HOLDS_ON_FAMILY", "FAILS", "INCONCLUSIVE"
CONDITIONS = ("a", "bpi", "b", "r", "w", "re", "rint")

_EVAL_ERRORS = (EvalDomainError, DomainError, ZeroDivisionError, OverflowError)


class SliceError(ValueError):
    pass


@dataclass(frozen=True)
class Tolerances:
    tol: float = 1e-3
    bound: float = 1e3
    threshold: float = 1e6
    e_values: tuple = (0.25, 0.5, 0.75)
    min_samples: int = MIN_SAMPLES

    @classmethod
    def from_dict(cls, d: dict | None) -> "Tolerances":
        d = dict(d or {})
        if "e_values" in d:
            d["e_values"] = tuple(d["e_values"])
        return cls(**d)


class PointGeom:
    """Geometry of one sample y of Y relative to the base point x0.

    ``rel`` is y - x0, ``along`` is pi(y) - x0 and ``perp`` is y - pi(y); all
    are built from exact parameter offsets so deep samples keep full accuracy.
    """

    __slots__ = ("y", "rel", "along", "perp", "TY", "TX", "_alpha")

    def __init__(self, y, rel, TY: Subspace, TX: Subspace):
        self.y = y
        self.rel = rel
        self.TY = TY
        self.TX = TX
        self.along = TX.project(rel)
        self.perp = [r - a for r, a in zip(rel, self.along)]
        self._alpha = None

    @property
    def alpha(self):
        if self._alpha is None:
            self._alpha = delta(self.TX, self.TY)
        return self._alpha


class _PairBase:
    def geom(self, y) -> PointGeom:
        raise NotImplementedError

    def series(self, family=None):
        raise NotImplementedError


@dataclass(eq=False)
class PairAtPoint(_PairBase):
    S: StratifiedSet
    pair: tuple
    x0: tuple
    family_config: FamilyConfig = field(default_factory=FamilyConfig)
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if tuple(self.pair) not in {tuple(p) for p in self.S.pairs}:
            raise ValueError(f"{tuple(self.pair)} is not a declared pair of {self.S.name}")
        if self.X.dim >= self.Y.dim:
            raise ValueError(f"checks need dim {self.pair[1]} < dim {self.pair[0]}")
        self.x0 = tuple(float(c) for c in self.x0)
        if len(self.x0) != self.S.ambient_dim:
            raise ValueError("base point has the wrong dimension")
        rel = [a - b for a, b in zip(self.x0, self.X.offset)]
        if not self.TX.contains(rel, 1e-12):
            raise ValueError(f"base point {list(self.x0)} is not on {self.X.name}")

    @property
    def Y(self):
        return self.S[self.pair[0]]

    @property
    def X(self):
        return self.S[self.pair[1]]

    @property
    def TX(self) -> Subspace:
        return self.X.tangent()

    @property
    def retraction(self) -> Retraction:
        return Retraction(self.X)

    def family(self):
        return standard_family((self.Y, self.X), self.x0, self.family_config)

    def _geom_from(self, params, offset):
        Y = self.Y
        y, jet = Y.point(params, EXTENDED)
        rel = []
        for i, c in enumerate(Y.layout):
            if c != "h" and c in offset:
                rel.append(XScalar.coerce(offset[c]))
            else:
                rel.append(y[i] - self.x0[i])
        TY = orthonormalize(Y.tangent_vectors(jet, EXTENDED), Y.ambient_dim)
        return PointGeom(y, rel, TY, self.TX)

    def geom(self, y) -> PointGeom:
        if isinstance(y, PointGeom):
            return y
        Y = self.Y
        params = {c: XScalar.coerce(v) for c, v in zip(Y.layout, y) if c != "h"}
        return self._geom_from(params, {})

    def curve_geoms(self, curve):
        key = (curve.label, curve.kind, curve.coef, curve.base, curve.side, curve.tsign, curve.t0, curve.count)
        if key not in self._cache:
            out = []
            for s in curve.samples(self.Y):
                try:
                    out.append(self._geom_from(s.params, s.offset))
                except _EVAL_ERRORS:
                    continue
            self._cache[key] = out
        return self._cache[key]

    def series(self, family=None):
        fam = self.family() if family is None else family
        return [(c.label, self.curve_geoms(c)) for c in fam]


# -- pointwise quantities -----------------------------------------------------


def alpha(P: _PairBase, y):
    """delta(T_pi(y) X, T_y Y)."""
    return P.geom(y).alpha


def beta(P: _PairBase, y):
    """eta of the unit secant y - pi(y) to T_y Y."""
    g = P.geom(y)
    if norm(g.perp) == 0:
        raise ValueError("y lies on X")
    return eta(unit(g.perp), g.TY)


def kuo_ratio(P: _PairBase, y):
    g = P.geom(y)
    return norm(g.rel) * g.alpha / norm(g.perp)


def verdier_quotient(P: _PairBase, y, x="pi"):
    """d(T_x X, T_y Y)/|y - x|; ``x`` is a point of X, or "pi" or "x0"."""
    g = P.geom(y)
    if isinstance(x, str):
        if x == "pi":
            d = norm(g.perp)
        elif x == "x0":
            d = norm(g.rel)
        else:
            raise ValueError(f"unknown reference point {x!r}")
    else:
        d = norm([r - (c - b) for r, c, b in zip(g.rel, x, P.x0)])
    if d == 0:
        raise ValueError("y coincides with x")
    return g.alpha / d


def re_quantity(P: _PairBase, e: float, y):
    """|pi(y)|^e * alpha / |y - pi(y)|, with |pi(y)| measured from the base point."""
    if not 0 <= e < 1:
        raise ValueError("e must lie in [0, 1)")
    g = P.geom(y)
    base = verdier_quotient(P, g, "pi")
    if e == 0:
        return base
    n = norm(g.along)
    if n == 0:
        return base * 0.0
    return XScalar.coerce(n) ** float(e) * base


# -- verdicts -----------------------------------------------------------------


@dataclass(frozen=True)
class CurveResult:
    label: str
    estimate: object  # LimitEstimate or None
    status: str  # conforming, witness, undetermined, insufficient
    samples: int


@dataclass(frozen=True)
class Verdict:
    condition: str
    outcome: str
    witness: str | None = None
    limit: object = None
    curves: tuple = ()
    notes: tuple = ()

    def __str__(self):
        if self.outcome == FAILS:
            lim = f", limit {self.limit}" if self.limit is not None else ""
            return f"({self.condition}) FAILS [witness {self.witness}{lim}]"
        return f"({self.condition}) {self.outcome}"


SEMANTICS_NOTE = "FAILS needs one conclusive witness curve; HOLDS_ON_FAMILY is evidence over the probe family, not a proof"


def _zero_status(est, tol):
    if est.kind == CONVERGED:
        return "conforming" if abs(est.value) <= tol else "witness"
    if est.kind == DIVERGING:
        return "witness"
    return "undetermined"


def _bounded_status(est, tol):
    if est.kind in (CONVERGED, BOUNDED):
        return "conforming"
    if est.kind == DIVERGING:
        return "witness"
    return "undetermined"


def _limit_repr(est):
    if est.kind == CONVERGED:
        return est.value
    return est.kind


def _aggregate(condition, results, notes=()):
    witness = next((r for r in results if r.status == "witness"), None)
    if witness is not None:
        outcome = FAILS
    elif results and all(r.status in ("conforming", "insufficient") for r in results) and any(
        r.status == "conforming" for r in results
    ):
        outcome = HOLDS
    else:
        outcome = INCONCLUSIVE
    skipped = [r.label for r in results if r.status == "insufficient"]
    notes = tuple(notes) + (SEMANTICS_NOTE,)
    if skipped:
        notes += (f"curves with fewer than the minimum valid samples, excluded: {', '.join(skipped)}",)
    return Verdict(
        condition,
        outcome,
        witness.label if witness else None,
        _limit_repr(witness.estimate) if witness else None,
        tuple(results),
        notes,
    )


def _classify_series(label, values, tols, status_fn):
    if len(values) < tols.min_samples:
        return CurveResult(label, None, "insufficient", len(values))
    try:
        est = classify_limit(values, tols.tol, tols.bound, tols.threshold, tols.min_samples)
    except TooFewSamplesError:
        return CurveResult(label, None, "insufficient", len(values))
    return CurveResult(label, est, status_fn(est, tols.tol), len(values))


def _values(fn, geoms):
    out = []
    for g in geoms:
        try:
            out.append(fn(g))
        except _EVAL_ERRORS:
            continue
        except ValueError:
            continue
    return out


def _quantity_check(P, condition, series, tols, fn, status_fn, suffix=""):
    results = [_classify_series(label + suffix, _values(fn, geoms), tols, status_fn) for label, geoms in series]
    return results


def check_condition(P: _PairBase, condition: str, family=None, tolerances: Tolerances | None = None) -> Verdict:
    """Evaluate ``condition`` along every curve of the family and aggregate.

    Conditions: a, bpi, b (= a and bpi), r, w, re (all default e values) or
    re(e) for a single exponent, and rint.
    """
    tols = tolerances or Tolerances()
    cond = condition.strip()
    if cond == "rint":
        res = rint_check(P)
        outcome = FAILS if res.kind == "diverging" else HOLDS
        return Verdict(
            "rint",
            outcome,
            "r(t) profile" if outcome == FAILS else None,
            "diverging" if outcome == FAILS else res.value,
            (),
            (f"partial integrals {', '.join(f'{v:.4g}' for v in res.partials)}",),
        )
    if cond == "b":
        va = check_condition(P, "a", family, tols)
        vb = check_condition(P, "bpi", family, tols)
        first = va if va.outcome == FAILS else vb
        if va.outcome == FAILS or vb.outcome == FAILS:
            outcome = FAILS
        elif va.outcome == HOLDS and vb.outcome == HOLDS:
            outcome = HOLDS
        else:
            outcome = INCONCLUSIVE
        return Verdict(
            "b",
            outcome,
            f"{first.witness} via ({first.condition})" if outcome == FAILS else None,
            first.limit if outcome == FAILS else None,
            va.curves + vb.curves,
            ("(b) is the conjunction of (a) and (bpi)", SEMANTICS_NOTE),
        )
    series = P.series(family)
    if cond == "a":
        return _aggregate("a", _quantity_check(P, cond, series, tols, lambda g: g.alpha, _zero_status))
    if cond == "bpi":
        return _aggregate("bpi", _quantity_check(P, cond, series, tols, lambda g: beta(P, g), _zero_status))
    if cond == "r":
        return _aggregate("r", _quantity_check(P, cond, series, tols, lambda g: kuo_ratio(P, g), _zero_status))
    if cond == "w":
        res = []
        for label, geoms in series:
            for ref in ("pi", "x0"):
                tag = " [x=pi(y)]" if ref == "pi" else " [x=x0]"
                vals = _values(lambda g: verdier_quotient(P, g, ref), geoms)
                res.append(_classify_series(label + tag, vals, tols, _bounded_status))
        return _aggregate("w", res, ("(w) uses both x = pi(y) and x = x0 along each curve",))
    if cond == "re" or cond.startswith("re("):
        es = tols.e_values if cond == "re" else (float(cond[3:-1]),)
        res = []
        for e in es:
            for label, geoms in series:
                vals = _values(lambda g: re_quantity(P, e, g), geoms)
                res.append(_classify_series(f"{label} [e={e:g}]", vals, tols, _bounded_status))
        return _aggregate(cond, res)
    raise ValueError(f"unknown condition {condition!r}; known: {', '.join(CONDITIONS)}")


# -- r(t) and its integral -----------------------------------------------------


@dataclass(frozen=True)
class RProfile:
    t: float
    value: float
    argmax: object  # transverse coordinate of the maximiser
    samples: int


def r_profile(P: PairAtPoint, t: float, count: int = 120, depth: float | None = None) -> RProfile:
    """sup of delta(X, T_y Y)/|y - pi(y)| over the fibre |pi(y) - x0| = t.

    The fibre is sampled at both signs of the along-offset, with transverse
    values whose |ln z| grows geometrically down to ``depth``
    (default max(1e4, 100/t^2), which contains the maximiser of flat graphs).
    """
    if t <= 0:
        raise ValueError("t must be positive")
    Y = P.Y
    depth = depth if depth is not None else max(1e4, 100.0 / t**2)
    hi = Y.domain[Y.transverse].hi if Y.transverse in Y.domain else 0.5
    l0 = -math.log(min(0.8 * hi, 0.4)) if hi > 0 else -math.log(0.4)
    ratio = (depth / l0) ** (1.0 / (count - 1))
    best, arg, n = 0.0, None, 0
    dom = Y.domain[Y.transverse]
    for side in (1, -1):
        da = XScalar.coerce(side * t)
        a = XScalar.coerce(P.x0[Y.layout.index(Y.along)]) + da
        for tsign in (1, -1):
            if not dom.allows_sign(tsign):
                continue
            for k in range(count):
                z = XScalar(tsign, -l0 * ratio**k)
                params = {Y.along: a, Y.transverse: z}
                if not Y.in_domain(params):
                    continue
                try:
                    g = P._geom_from(params, {Y.along: da, Y.transverse: z})
                    v = to_float_saturating(g.alpha / norm(g.perp))
                except _EVAL_ERRORS:
                    continue
                n += 1
                if v > best or arg is None:
                    best, arg = v, z
    if n == 0:
        raise ValueError(f"empty fibre sample at t = {t}")
    return RProfile(t, best, arg, n)


@dataclass(frozen=True)
class RintResult:
    kind: str  # converging or diverging
    value: float | None
    partials: tuple
    profile: tuple


def rint_check(P=None, eps_grid=None, profile=None, tol: float = 1e-3) -> RintResult:
    """Trapezoid partial integrals of r over [eps_k, eps_0] and a Cauchy test.

    ``profile`` may be a callable t -> r(t) replacing the fibre computation.
    """
    eps = list(eps_grid) if eps_grid is not None else [0.1 * 0.5**k for k in range(16)]
    if len(eps) < 12:
        raise ValueError("eps_grid needs at least 12 points")
    if any(b >= a for a, b in zip(eps, eps[1:])) or eps[-1] <= 0:
        raise ValueError("eps_grid must be positive and strictly decreasing")
    if profile is None:
        if P is None:
            raise ValueError("need a pair or a profile")
        rs = [r_profile(P, t).value for t in eps]
    else:
        rs = [float(profile(t)) for t in eps]
    partials = [0.0]
    for k in range(1, len(eps)):
        partials.append(partials[-1] + 0.5 * (rs[k] + rs[k - 1]) * (eps[k - 1] - eps[k]))
    incs = [b - a for a, b in zip(partials, partials[1:])]
    total = partials[-1]
    if all(abs(d) <= tol * max(1.0, abs(total)) for d in incs[-3:]):
        return RintResult("converging", total, tuple(partials), tuple(rs))
    return RintResult("diverging", None, tuple(partials), tuple(rs))


# -- codimension-one slices -----------------------------------------------------


def solve_slice(Y, a: float, along_value: float, lo: float = -1e4, hi: float = -1e-2, tol: float = 1e-12):
    """Log of the transverse root of h(along, z) = a*z by bisection in ln z."""
    x = XScalar.coerce(along_value)

    def F(L):
        z = XScalar(1, L)
        h = eval_jet(Y.expr, {Y.along: x, Y.transverse: z}, EXTENDED).value
        return h - z * a

    try:
        flo, fhi = F(lo), F(hi)
    except _EVAL_ERRORS as exc:
        raise SliceError(f"slice a={a:g} undefined at {Y.along}={along_value:g}: {exc}") from exc
    if flo.sign == 0:
        return lo
    if fhi.sign == 0:
        return hi
    if flo.sign == fhi.sign:
        raise SliceError(f"no root of h = {a:g}*z in ln z in [{lo:g}, {hi:g}] at {Y.along}={along_value:g}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = F(mid)
        if fm.sign == 0:
            return mid
        if fm.sign == flo.sign:
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


@dataclass(eq=False)
class SlicedPair(_PairBase):
    """The curve Y cap {y = a z} with the base stratum X."""

    parent: PairAtPoint
    a: float
    along_values: tuple
    roots: dict  # along value -> ln z
    errors: tuple = ()

    @property
    def x0(self):
        return self.parent.x0

    @property
    def TX(self):
        return self.parent.TX

    def _geom_from_root(self, xv, L):
        P, Y = self.parent, self.parent.Y
        x, z = XScalar.coerce(xv), XScalar(1, L)
        jet = eval_jet(Y.expr, {Y.along: x, Y.transverse: z}, EXTENDED)
        grad = dict(zip(Y.expr.free_vars, jet.gradient))
        zero = XScalar(0)
        hx, hz = grad.get(Y.along, zero), grad.get(Y.transverse, zero)
        dz = -hx / (hz - self.a)  # implicit differentiation of h - a z = 0
        vec, rel = [], []
        base = XScalar.coerce(P.x0[Y.layout.index(Y.along)])
        for i, c in enumerate(Y.layout):
            if c == "h":
                vec.append(dz * self.a)
                rel.append(z * self.a)
            elif c == Y.along:
                vec.append(XScalar(1, 0.0))
                rel.append(x - base)
            elif c == Y.transverse:
                vec.append(dz)
                rel.append(z)
            else:
                vec.append(zero)
                rel.append(zero)
        return PointGeom(None, rel, orthonormalize([vec], len(Y.layout)), P.TX)

    def geom(self, y) -> PointGeom:
        if isinstance(y, PointGeom):
            return y
        Y = self.parent.Y
        xv = float(y[Y.layout.index(Y.along)])
        return self._geom_from_root(xv, solve_slice(Y, self.a, xv))

    def series(self, family=None):
        out = []
        for side, label in ((1, "slice branch +"), (-1, "slice branch -")):
            geoms = []
            for xv in self.along_values:
                key = side * xv
                if key not in self.roots:
                    continue
                try:
                    geoms.append(self._geom_from_root(key, self.roots[key]))
                except _EVAL_ERRORS:
                    continue
            if geoms:
                out.append((label, geoms))
        return out


def slice_pair(P: PairAtPoint, a: float, count: int = 40, lo: float = -1e4, hi: float = -1e-2) -> SlicedPair:
    """Slice Y by the plane {h-coordinate = a * transverse}, which contains X.

    The along-samples run geometrically from 0.1 down to the smallest value
    whose flat-graph root ln z = ln(a)/x^2 stays inside the bracket.
    """
    if not 0 < a:
        raise ValueError("slope a must be positive")
    Y = P.Y
    if Y.kind != "graph" or set(Y.layout) != {Y.along, "h", Y.transverse}:
        raise ValueError("slices need a graph over (along, transverse) in three dimensions")
    if P.x0[Y.layout.index(Y.along)] != 0.0:
        raise ValueError("slices are taken at the origin of X")
    x_min = math.sqrt(abs(math.log(a)) / (0.98 * abs(lo))) if a != 1 else 1e-3
    x_min = max(x_min, 1e-3)
    ratio = (x_min / 0.1) ** (1.0 / (count - 1))
    along = tuple(0.1 * ratio**k for k in range(count))
    roots, errors = {}, []
    for xv in along:
        for side in (1, -1):
            v = side * xv
            try:
                roots[v] = solve_slice(Y, a, v, lo, hi)
            except SliceError as exc:
                errors.append(str(exc))
    return SlicedPair(P, a, along, roots, tuple(errors))
