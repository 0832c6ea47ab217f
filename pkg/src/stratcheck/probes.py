"""Probe arcs approaching a base point and classification of limits along them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .expr import EXTENDED, EvalDomainError
from .numscale import DomainError, XScalar, to_float_saturating

__all__ = [
    "FamilyConfig",
    "ProbeCurve",
    "CurveSample",
    "LimitEstimate",
    "TooFewSamplesError",
    "standard_family",
    "sigma_sweep",
    "sample_geometric",
    "log_depth_grid",
    "capped_flat_grid",
    "classify_limit",
    "CONVERGED",
    "BOUNDED",
    "DIVERGING",
    "INCONCLUSIVE",
]

CONVERGED, BOUNDED, DIVERGING, INCONCLUSIVE = "Converged", "Bounded", "Diverging", "Inconclusive"

MIN_SAMPLES = 8
BOUND_CAP = 1e3
DIVERGE_THRESHOLD = 1e6
SATURATION = 1e300
# deepest |ln t| on the log-depth grid and deepest |ln z| on flat curves
LOG_DEPTH = 1e6
FLAT_DEPTH = 1e7


class TooFewSamplesError(ValueError):
    pass


@dataclass(frozen=True)
class FamilyConfig:
    rays: tuple = (0.2, 1.0, 5.0)
    powers: tuple = (2, 3, 5, 8)
    flat_C: tuple = (1.0, 0.5, 2.0)
    flat_q: tuple = (1, 2, 3)
    sigmas: tuple = (0.25, 0.5, 0.75)
    vertical: bool = True
    mirror: bool = True
    t0: float = 0.1
    count: int = 40

    @classmethod
    def from_dict(cls, d: dict) -> "FamilyConfig":
        kw = {}
        for key in ("rays", "powers", "sigmas"):
            if key in d:
                kw[key] = tuple(d[key])
        if "flats" in d:
            kw["flat_C"] = tuple(d["flats"].get("C", cls.flat_C))
            kw["flat_q"] = tuple(d["flats"].get("q", cls.flat_q))
        for key in ("vertical", "mirror", "t0", "count"):
            if key in d:
                kw[key] = d[key]
        return cls(**kw)


def sample_geometric(curve=None, t0: float = 0.1, ratio: float = 0.5, count: int = 40):
    """t_k = t0 * ratio**k for k < count."""
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie in (0, 1)")
    if count > 60:
        raise ValueError("count is limited to 60")
    return [t0 * ratio**k for k in range(count)]


def log_depth_grid(t0: float = 0.1, depth: float = LOG_DEPTH, count: int = 40):
    """XScalar parameters whose |ln t| grows geometrically from |ln t0| to ``depth``."""
    l0 = -math.log(t0)
    ratio = (depth / l0) ** (1.0 / (count - 1))
    return [XScalar(1, -l0 * ratio**k) for k in range(count)]


def capped_flat_grid(C: float, q: float, t0: float = 0.1, count: int = 40, depth: float = FLAT_DEPTH):
    """Geometric t-grid for z = exp(-C/t^q), stopping where |ln z| reaches ``depth``."""
    t_min = (C / depth) ** (1.0 / q)
    if t_min >= t0:
        return [t0]
    ratio = (t_min / t0) ** (1.0 / (count - 1))
    return [t0 * ratio**k for k in range(count)]


@dataclass(frozen=True)
class CurveSample:
    t: object
    params: dict
    offset: dict  # parameter displacement from the base point, exact


@dataclass(frozen=True)
class ProbeCurve:
    """Arc in the (along, transverse) parameter plane, lifted to Y through the graph.

    ``kind`` is one of ray, vertical, power, flat, sigma.  ``side`` mirrors the
    along-coordinate and ``tsign`` the transverse one.
    """

    label: str
    kind: str
    coef: tuple
    base: float
    side: int = 1
    tsign: int = 1
    along: str = "x"
    transverse: str = "z"
    scalar_system: str = EXTENDED
    t0: float = 0.1
    count: int = 40

    def grid(self):
        if self.kind == "flat":
            C, q = self.coef
            return capped_flat_grid(C, q, self.t0, self.count)
        if self.kind == "sigma":
            return capped_flat_grid(-math.log(self.coef[0]), 2, self.t0, self.count)
        return log_depth_grid(self.t0, LOG_DEPTH, self.count)

    def transverse_at(self, t) -> XScalar:
        t = XScalar.coerce(t)
        k = self.kind
        if k == "ray":
            z = t * self.coef[0]
        elif k == "vertical":
            z = t
        elif k == "power":
            z = XScalar(1, self.coef[0] * t.logmag)
        elif k == "flat":
            C, q = self.coef
            z = XScalar(1, -C / float(t) ** q)
        elif k == "sigma":
            z = XScalar(1, math.log(self.coef[0]) / float(t) ** 2)
        else:
            raise ValueError(f"unknown curve kind {k}")
        return z if self.tsign > 0 else -z

    def along_offset(self, t) -> XScalar:
        if self.kind == "vertical":
            return XScalar(0)
        return XScalar.coerce(t) * self.side

    def sample(self, t) -> CurveSample:
        da = self.along_offset(t)
        dz = self.transverse_at(t)
        a = XScalar.coerce(self.base) + da
        return CurveSample(t, {self.along: a, self.transverse: dz}, {self.along: da, self.transverse: dz})

    def samples(self, stratum=None):
        """Samples over the default grid, keeping those inside the stratum's domain."""
        out = []
        for t in self.grid():
            s = self.sample(t)
            if stratum is not None and not stratum.in_domain(s.params):
                continue
            out.append(s)
        return out


def _curve(kind, coef, base, side, tsign, label, cfg, along, transverse):
    return ProbeCurve(label, kind, coef, base, side, tsign, along, transverse, EXTENDED, cfg.t0, cfg.count)


def _label(kind, coef, side, tsign):
    if kind == "ray":
        body = f"ray c={coef[0]:g}"
    elif kind == "vertical":
        body = "vertical"
    elif kind == "power":
        body = f"power p={coef[0]:g}"
    elif kind == "flat":
        body = f"flat C={coef[0]:g} q={coef[1]:g}"
    else:
        body = f"sigma={coef[0]:g}"
    if side < 0:
        body += " mirrored"
    if tsign < 0:
        body += " below"
    return body


def standard_family(pair, basepoint, config: FamilyConfig | None = None):
    """Default probe family around ``basepoint`` for a graph stratum ``pair[0]``.

    ``pair`` is ``(Y, X)`` with Y a graph stratum over (along, transverse)
    parameters.  Curves are ordered rays, vertical, powers, flats (q outer,
    C inner), sigmas; each followed by its mirrored copy.
    """
    cfg = config or FamilyConfig()
    Y = pair[0]
    if Y.kind != "graph" or Y.along is None or Y.transverse is None:
        raise ValueError(f"stratum {Y.name} is not a graph over (along, transverse) parameters")
    base = float(basepoint[Y.layout.index(Y.along)])
    dom = Y.domain[Y.transverse]
    tsigns = [s for s in (1, -1) if dom.allows_sign(s)]
    sides = (1, -1) if cfg.mirror else (1,)
    specs = [("ray", (c,)) for c in cfg.rays]
    if cfg.vertical:
        specs.append(("vertical", ()))
    specs += [("power", (p,)) for p in cfg.powers]
    specs += [("flat", (C, q)) for q in cfg.flat_q for C in cfg.flat_C]
    specs += [("sigma", (s,)) for s in cfg.sigmas]
    out = []
    for kind, coef in specs:
        for tsign in tsigns:
            for side in sides if kind != "vertical" else (1,):
                out.append(_curve(kind, coef, base, side, tsign, _label(kind, coef, side, tsign), cfg, Y.along, Y.transverse))
    return out


def sigma_sweep(pair, basepoint, sigmas=None, config: FamilyConfig | None = None):
    """Sigma curves at the resolution used for detecting fibre arcs."""
    cfg = config or FamilyConfig()
    sigmas = sigmas if sigmas is not None else [round(0.05 * k, 2) for k in range(1, 20)]
    Y = pair[0]
    base = float(basepoint[Y.layout.index(Y.along)])
    return [_curve("sigma", (s,), base, 1, 1, _label("sigma", (s,), 1, 1), cfg, Y.along, Y.transverse) for s in sigmas]


@dataclass(frozen=True)
class LimitEstimate:
    kind: str
    value: float | None
    samples: int
    tol: float
    note: str = ""
    tail: tuple = field(default=(), repr=False)

    def __str__(self):
        if self.kind == CONVERGED:
            return f"Converged({self.value:.6g})"
        if self.kind == BOUNDED:
            return f"Bounded({self.value:.6g})"
        return self.kind


def _aitken(v0, v1, v2):
    d1, d2 = v1 - v0, v2 - v1
    den = d2 - d1
    if den == 0 or not math.isfinite(den):
        return None
    return v2 - d2 * d2 / den


def classify_limit(
    values,
    tol: float = 1e-3,
    bound: float = BOUND_CAP,
    threshold: float = DIVERGE_THRESHOLD,
    min_samples: int = MIN_SAMPLES,
    window: int = 4,
    growth_window: int = 8,
) -> LimitEstimate:
    """Classify a sequence sampled along t -> 0.

    Converged: the last ``window`` values lie within ``tol * max(1, |last|)`` of
    each other (Aitken's estimate replaces the last value when it stays within
    that band).  Diverging: saturation, or monotone growth of |v| over the
    growth window with either |v| > ``threshold`` or non-shrinking increments.
    Bounded: max |v| <= ``bound``.  Otherwise Inconclusive.
    """
    vals = [to_float_saturating(v, SATURATION) if isinstance(v, XScalar) else float(v) for v in values]
    n = len(vals)
    if n < min_samples:
        raise TooFewSamplesError(f"{n} samples, need at least {min_samples}")
    if any(math.isnan(v) for v in vals):
        raise ValueError("NaN in limit sequence")
    mags = [min(abs(v), SATURATION) for v in vals]
    tail = tuple(vals[-window:])
    if mags[-1] >= SATURATION:
        return LimitEstimate(DIVERGING, None, n, tol, "saturated", tail)
    last = vals[-1]
    band = tol * max(1.0, abs(last))
    if max(tail) - min(tail) <= band:
        L = last
        acc = _aitken(*vals[-3:])
        if acc is not None and abs(acc - last) <= band:
            L = acc
        return LimitEstimate(CONVERGED, L, n, tol, "", tail)
    g = mags[-growth_window:]
    incs = [b - a for a, b in zip(g, g[1:])]
    monotone = all(d >= -1e-6 * max(1.0, b) for d, b in zip(incs, g[1:]))
    if monotone and g[-1] > g[0]:
        steady = all(b >= a - 1e-6 * max(1.0, abs(a)) for a, b in zip(incs, incs[1:]))
        if g[-1] > threshold or steady:
            return LimitEstimate(DIVERGING, None, n, tol, "growth", tail)
    M = max(mags)
    if M <= bound:
        return LimitEstimate(BOUNDED, M, n, tol, "", tail)
    return LimitEstimate(INCONCLUSIVE, None, n, tol, "", tail)


def safe_eval(fn, samples):
    """Apply ``fn`` to each sample, dropping samples outside the function domain."""
    out, used = [], []
    for s in samples:
        try:
            out.append(fn(s))
            used.append(s)
        except (EvalDomainError, DomainError, ZeroDivisionError):
            continue
    return out, used
