"""Stratified sets: strata, retractions and the built-in catalog."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .expr import EXTENDED, STANDARD, Expr, eval_jet, parse
from .geom import Subspace, dot, orthonormalize
from .numscale import XScalar

__all__ = [
    "Interval",
    "AffineStratum",
    "GraphStratum",
    "RegionStratum",
    "StratifiedSet",
    "Retraction",
    "CatalogError",
    "EmptyFiberError",
    "CATALOG_NAMES",
    "catalog",
    "graph_set",
    "project",
    "sample_fiber",
]

CATALOG_NAMES = ("Sf", "Sg", "Kg", "halfplane", "plane_graph_zero", "cusp_demo", "sine_curve_demo")

G_TEXT = "z^(x^2+1)"
F_TEXT = "z - z/ln(z)*ln(x + sqrt(x^2 + z^2))"


class CatalogError(KeyError):
    pass


class EmptyFiberError(ValueError):
    pass


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    closed_lo: bool = False
    closed_hi: bool = False
    exclude_zero: bool = False

    def contains(self, v) -> bool:
        lo_ok = v >= self.lo if self.closed_lo else v > self.lo
        hi_ok = v <= self.hi if self.closed_hi else v < self.hi
        return lo_ok and hi_ok and not (self.exclude_zero and v == 0)

    def allows_sign(self, s: int) -> bool:
        return self.hi > 0 if s > 0 else self.lo < 0


@dataclass(frozen=True)
class AffineStratum:
    name: str
    basis: tuple
    offset: tuple
    kind: str = field(default="affine", init=False)

    def __post_init__(self):
        if self.basis:
            frame = orthonormalize(self.basis, len(self.offset))
            if any(abs(a - b) > 1e-12 for v, w in zip(frame.frame, self.basis) for a, b in zip(v, w)):
                raise ValueError(f"basis of {self.name} must be orthonormal")

    @property
    def dim(self):
        return len(self.basis)

    @property
    def ambient_dim(self):
        return len(self.offset)

    def tangent(self) -> Subspace:
        return Subspace(self.ambient_dim, tuple(tuple(b) for b in self.basis))


@dataclass(frozen=True)
class GraphStratum:
    """Graph of ``expr`` over a parameter box; ``layout`` names each ambient coordinate."""

    name: str
    expr: Expr
    params: tuple
    domain: dict
    layout: tuple
    along: str | None = None
    transverse: str | None = None
    kind: str = field(default="graph", init=False)

    def __post_init__(self):
        if "h" not in self.layout or sorted(c for c in self.layout if c != "h") != sorted(self.params):
            raise ValueError(f"layout {self.layout} must hold every parameter and one 'h'")
        missing = set(self.expr.free_vars) - set(self.params)
        if missing:
            raise ValueError(f"expression of {self.name} uses non-parameters {sorted(missing)}")
        if any(iv.lo >= iv.hi for iv in self.domain.values()):
            raise ValueError(f"empty parameter domain for {self.name}")

    @property
    def dim(self):
        return len(self.params)

    @property
    def ambient_dim(self):
        return len(self.layout)

    def in_domain(self, params: dict) -> bool:
        return all(self.domain[p].contains(params[p]) for p in self.params if p in self.domain)

    def point(self, params: dict, scalar_system=STANDARD):
        jet = eval_jet(self.expr, params, scalar_system)
        return [jet.value if c == "h" else _coerce(params[c], scalar_system) for c in self.layout], jet

    def tangent_vectors(self, jet, scalar_system=STANDARD):
        grad = dict(zip(self.expr.free_vars, jet.gradient))
        zero, one = _coerce(0.0, scalar_system), _coerce(1.0, scalar_system)
        return [[grad.get(p, zero) if c == "h" else (one if c == p else zero) for c in self.layout] for p in self.params]

    def tangent(self, params: dict, scalar_system=STANDARD) -> Subspace:
        _, jet = self.point(params, scalar_system)
        return orthonormalize(self.tangent_vectors(jet, scalar_system), self.ambient_dim)


@dataclass(frozen=True)
class RegionStratum:
    """Open region ``lower < layout[bounded] < expr(params)`` over a parameter box."""

    name: str
    expr: Expr
    params: tuple
    domain: dict
    layout: tuple
    bounded: str
    lower: float = 0.0
    kind: str = field(default="region", init=False)

    @property
    def dim(self):
        return len(self.layout)

    @property
    def ambient_dim(self):
        return len(self.layout)


def _coerce(v, scalar_system):
    if scalar_system == EXTENDED:
        return XScalar.coerce(v)
    return float(v)


@dataclass(frozen=True)
class StratifiedSet:
    name: str
    ambient_dim: int
    strata: dict
    pairs: tuple
    notes: tuple = ()
    # the frontier condition dim X < dim Y; only the non-definable demo relaxes it
    frontier: bool = True

    def __post_init__(self):
        for y, x in self.pairs:
            if y not in self.strata or x not in self.strata:
                raise ValueError(f"pair ({y}, {x}) references an unknown stratum")
            if self.frontier and self.strata[x].dim >= self.strata[y].dim:
                raise ValueError(f"pair ({y}, {x}) needs dim {x} < dim {y}")
        for s in self.strata.values():
            if s.ambient_dim != self.ambient_dim:
                raise ValueError(f"stratum {s.name} is not in ambient dimension {self.ambient_dim}")

    def __getitem__(self, name):
        return self.strata[name]


@dataclass(frozen=True)
class Retraction:
    """Orthogonal projection onto an affine stratum."""

    target: AffineStratum

    def __post_init__(self):
        if self.target.kind != "affine":
            raise ValueError("retractions are only defined onto affine strata")

    def __call__(self, p):
        return project(self, p)


def project(pi: Retraction, p):
    X = pi.target
    rel = [a - b for a, b in zip(p, X.offset)]
    out = [0.0 * a + b for a, b in zip(p, X.offset)]
    for b in X.basis:
        c = dot(rel, b)
        out = [o + c * e for o, e in zip(out, b)]
    return out


def _box(x=0.5, z=(0.0, 0.5), exclude_zero=False):
    return {"x": Interval(-x, x, True, True), "z": Interval(z[0], z[1], exclude_zero=exclude_zero)}


_X_AXIS = AffineStratum("X", ((1.0, 0.0, 0.0),), (0.0, 0.0, 0.0))


def graph_set(name: str, text: str, zrange=(0.0, 0.5), exclude_zero=False, notes=(), xhalf=0.5) -> StratifiedSet:
    """Two-stratum set: the graph y = h(x, z) over |x| <= xhalf, z in zrange, and the x-axis."""
    Y = GraphStratum(
        "Y",
        parse(text),
        ("x", "z"),
        _box(x=xhalf, z=zrange, exclude_zero=exclude_zero),
        ("x", "h", "z"),
        along="x",
        transverse="z",
    )
    return StratifiedSet(name, 3, {"Y": Y, "X": _X_AXIS}, (("Y", "X"),), tuple(notes))


def catalog(name: str) -> StratifiedSet:
    if name == "Sg":
        s = graph_set("Sg", G_TEXT)
        W = GraphStratum("W", s["Y"].expr, ("x", "z"), _box(), ("x", "h", "z"), along="x", transverse="z")
        return StratifiedSet("Sg", 3, {"W": W, "X": _X_AXIS}, (("W", "X"),))
    if name == "Sf":
        return graph_set("Sf", F_TEXT)
    if name == "Kg":
        g = parse(G_TEXT)
        K = RegionStratum("K", g, ("x", "z"), _box(), ("x", "y", "z"), bounded="y", lower=0.0)
        W = GraphStratum("W", g, ("x", "z"), _box(), ("x", "h", "z"), along="x", transverse="z")
        H = GraphStratum("H", parse("0"), ("x", "z"), _box(), ("x", "h", "z"), along="x", transverse="z")
        pairs = (("K", "W"), ("K", "H"), ("K", "X"), ("W", "X"), ("H", "X"))
        note = "K_g modelled as the subgraph region {z >= 0, 0 <= y <= g(x,z)}, not the literal convex hull"
        return StratifiedSet("Kg", 3, {"K": K, "W": W, "H": H, "X": _X_AXIS}, pairs, (note,))
    if name == "halfplane":
        return graph_set("halfplane", "0")
    if name == "plane_graph_zero":
        return graph_set("plane_graph_zero", "0", zrange=(-0.5, 0.5), exclude_zero=True)
    if name == "cusp_demo":
        return graph_set("cusp_demo", "z*sqrt(z)")
    if name == "sine_curve_demo":
        Y = GraphStratum("Y", parse("sin(1/x)"), ("x",), {"x": Interval(0.0, 0.5)}, ("x", "h"), transverse="x")
        X = AffineStratum("X", ((0.0, 1.0),), (0.0, 0.0))
        note = "topologist's sine curve: not definable, catalog demonstration only"
        return StratifiedSet("sine_curve_demo", 2, {"Y": Y, "X": X}, (("Y", "X"),), (note,), frontier=False)
    raise CatalogError(f"unknown catalog set {name!r}; known: {', '.join(CATALOG_NAMES)}")


def _fiber_offsets(radius, count, depth):
    """Positive transverse offsets, log-spaced from ``radius`` downwards."""
    if depth is None:
        return [radius * 0.5**k for k in range(count)]
    # log-geometric: |ln z| grows geometrically up to ``depth``
    l0 = -math.log(radius)
    ratio = (depth / l0) ** (1.0 / max(count - 1, 1))
    return [XScalar(1, -l0 * ratio**k) for k in range(count)]


def sample_fiber(S: StratifiedSet, Y, x0, radius: float, count: int = 41, depth: float | None = None):
    """Points of graph stratum ``Y`` in the fibre over ``x0`` of the retraction onto X.

    The default spacing halves the transverse parameter ``count - 1`` times,
    reaching ``radius * 2**-40``.  With ``depth`` the offsets are XScalars whose
    ``|ln z|`` grows geometrically to ``depth``.
    """
    if isinstance(Y, str):
        Y = S[Y]
    if Y.kind != "graph" or Y.along is None or Y.transverse is None:
        raise EmptyFiberError(f"stratum {Y.name} has no (along, transverse) parameterisation")
    xi = Y.layout.index(Y.along)
    a0 = float(x0[xi])
    system = EXTENDED if depth is not None else STANDARD
    pts = []
    dom = Y.domain[Y.transverse]
    for side in (1, -1):
        if not dom.allows_sign(side):
            continue
        for off in _fiber_offsets(radius, count, depth):
            z = off if side > 0 else -off
            params = {Y.along: _coerce(a0, system), Y.transverse: z}
            if not Y.in_domain(params):
                continue
            p, _ = Y.point(params, system)
            pts.append(p)
    if not pts:
        raise EmptyFiberError(f"no points of {Y.name} over {list(x0)}")
    return pts
