"""Normal-cone fibres, fibre tangent cones and the (n), (npf), C^1-boundary checks."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .geom import Subspace, delta, norm, orthonormalize, unit
from .numscale import XScalar
from .probes import CONVERGED, TooFewSamplesError, classify_limit, sigma_sweep
from .regularity import HOLDS, FAILS, INCONCLUSIVE, PairAtPoint
from .strata import EmptyFiberError, sample_fiber

__all__ = [
    "ConeFiber",
    "FiberTangentCone",
    "ConeCheck",
    "C1Evidence",
    "secant_direction",
    "cone_fiber",
    "fiber_tangent_cone",
    "check_n",
    "check_npf",
    "c1_boundary_evidence",
    "directions_csv",
    "slope",
    "hausdorff",
    "EVIDENCE_FOR",
    "EVIDENCE_AGAINST",
]

DIM_ANGLE = 0.05
N_ANGLE = 0.02
NPF_ANGLE = 0.1
C1_SPREAD = 0.02
EVIDENCE_FOR, EVIDENCE_AGAINST = "EVIDENCE_FOR", "EVIDENCE_AGAINST"
NPF_NOTE = "(npf) is tested as lower semicontinuity of the cone fibre over a grid, a necessary condition for openness"


def _float_unit(v):
    u = unit(v)
    return [float(c) for c in u]


def secant_direction(P, y):
    """Unit vector along y - pi(y), as floats."""
    g = P.geom(y)
    if norm(g.perp) == 0:
        raise ValueError("y lies on X")
    return _float_unit(g.perp)


def angle(a, b) -> float:
    d = math.hypot(*[x - y for x, y in zip(a, b)])
    s = math.hypot(*[x + y for x, y in zip(a, b)])
    return 2.0 * math.atan2(d, s)


def _to_sphere(u):
    """Hyperspherical angles of a unit vector."""
    n = len(u)
    out = []
    for k in range(n - 2):
        out.append(math.atan2(math.hypot(*u[k + 1 :]), u[k]))
    out.append(math.atan2(u[-1], u[-2]))
    return out


def _from_sphere(phis):
    n = len(phis) + 1
    u, s = [], 1.0
    for k in range(n - 2):
        u.append(s * math.cos(phis[k]))
        s *= math.sin(phis[k])
    u.append(s * math.cos(phis[-1]))
    u.append(s * math.sin(phis[-1]))
    return u


def _limit_direction(dirs, tol=1e-3):
    """Classify the limit of a sequence of unit vectors via their spherical angles."""
    if len(dirs) < 8:
        raise TooFewSamplesError(f"{len(dirs)} samples")
    angles = [_to_sphere(d) for d in dirs]
    # unwrap the last angle so a limit near +-pi is not split
    last = np.unwrap([a[-1] for a in angles]).tolist()
    cols = [[a[k] for a in angles] for k in range(len(angles[0]) - 1)] + [last]
    ests = [classify_limit(c, tol) for c in cols]
    if all(e.kind == CONVERGED for e in ests):
        return _from_sphere([e.value for e in ests]), ests
    return None, ests


def slope(direction, layout=("x", "h", "z"), num="h", den="z") -> float:
    d = direction[layout.index(den)]
    return direction[layout.index(num)] / d if d != 0 else math.inf


def hausdorff(A, B) -> float:
    """One-sided angular distance: sup over a in A of the angle to the nearest b in B."""
    if not A:
        return 0.0
    if not B:
        return math.pi
    return max(min(angle(a, b) for b in B) for a in A)


def _dimension(dirs):
    if not dirs:
        return None
    spread = max((angle(a, b) for a in dirs for b in dirs), default=0.0)
    return 0 if spread <= DIM_ANGLE else 1


@dataclass(frozen=True)
class ConeFiber:
    basepoint: tuple
    directions: tuple  # (label, unit vector, classification)
    dimension: int | None
    excluded: tuple
    spread: float

    def vectors(self):
        return [d for _, d, _ in self.directions]


@dataclass(frozen=True)
class FiberTangentCone:
    basepoint: tuple
    directions: tuple  # (branch label, unit vector)

    def vectors(self):
        return [d for _, d in self.directions]


def _at(P: PairAtPoint, x0) -> PairAtPoint:
    x0 = tuple(float(c) for c in x0)
    if x0 == P.x0:
        return P
    return PairAtPoint(P.S, P.pair, x0, P.family_config)


def cone_fiber(P: PairAtPoint, x0=None, family=None, sweep: bool = True) -> ConeFiber:
    """Limit secant directions of the probe family (plus the sigma sweep) over x0."""
    P = _at(P, P.x0 if x0 is None else x0)
    fam = list(P.family() if family is None else family)
    if sweep:
        have = {c.label for c in fam}
        fam += [c for c in sigma_sweep((P.Y, P.X), P.x0, config=P.family_config) if c.label not in have]
    found, excluded = [], []
    for c in fam:
        dirs = []
        for g in P.curve_geoms(c):
            if norm(g.perp) != 0:
                dirs.append(_float_unit(g.perp))
        try:
            lim, ests = _limit_direction(dirs)
        except TooFewSamplesError:
            excluded.append((c.label, f"{len(dirs)} valid samples"))
            continue
        if lim is None:
            excluded.append((c.label, "/".join(e.kind for e in ests)))
            continue
        found.append((c.label, tuple(lim), "Converged"))
    vecs = [d for _, d, _ in found]
    spread = max((angle(a, b) for a in vecs for b in vecs), default=0.0)
    return ConeFiber(P.x0, tuple(found), _dimension(vecs), tuple(excluded), spread)


def fiber_tangent_cone(P: PairAtPoint, x0=None, radius: float = 0.1, count: int = 41, depth: float = 1e6):
    """Limits of secants from x0 to points of the fibre S ∩ pi^{-1}(x0), one per branch."""
    P = _at(P, P.x0 if x0 is None else x0)
    pts = sample_fiber(P.S, P.Y, P.x0, radius, count, depth)
    branches = {}
    zi = P.Y.layout.index(P.Y.transverse)
    for p in pts:
        sec = [XScalar.coerce(c) - b for c, b in zip(p, P.x0)]
        key = "above" if XScalar.coerce(p[zi]) > 0 else "below"
        branches.setdefault(key, []).append(_float_unit(sec))
    out = []
    for key, dirs in branches.items():
        try:
            lim, _ = _limit_direction(dirs)
        except TooFewSamplesError:
            continue
        if lim is not None:
            out.append((key, tuple(lim)))
    if not out:
        raise EmptyFiberError("no convergent fibre secants")
    return FiberTangentCone(P.x0, tuple(out))


@dataclass(frozen=True)
class ConeCheck:
    condition: str
    outcome: str
    details: dict
    notes: tuple = ()

    def __str__(self):
        return f"({self.condition}) {self.outcome}"


def check_n(P: PairAtPoint, x0=None) -> ConeCheck:
    """Compare the normal-cone fibre with the fibre's tangent cone (both inclusions)."""
    cf = cone_fiber(P, x0)
    tc = fiber_tangent_cone(P, x0)
    A, B = cf.vectors(), tc.vectors()
    if not A:
        return ConeCheck("n", INCONCLUSIVE, {"reason": "no convergent probe directions"})
    d1, d2 = hausdorff(A, B), hausdorff(B, A)
    outcome = FAILS if max(d1, d2) > N_ANGLE else HOLDS
    details = {
        "cone_to_tangent": d1,
        "tangent_to_cone": d2,
        "cone_slopes": sorted({round(slope(v, P.Y.layout), 6) for v in A}),
        "tangent_slopes": sorted({round(slope(v, P.Y.layout), 6) for v in B}),
        "excluded": [lab for lab, _ in cf.excluded],
    }
    if outcome == FAILS:
        worst = max(cf.directions, key=lambda t: min(angle(t[1], b) for b in B)) if d1 >= d2 else None
        details["witness"] = worst[0] if worst else "fibre tangent direction outside the cone fibre"
    return ConeCheck("n", outcome, details)


def _along(P, x0):
    return float(x0[P.Y.layout.index(P.Y.along)])


def check_npf(P: PairAtPoint, x0_grid) -> ConeCheck:
    """Flag a dimension jump or a Hausdorff jump > 0.1 rad between adjacent fibres."""
    fibers = sorted((cone_fiber(P, x) for x in x0_grid), key=lambda f: _along(P, f.basepoint))
    dims = [f.dimension for f in fibers]
    jumps = []
    known = [f for f in fibers if f.dimension is not None]
    for f1, f2 in zip(known, known[1:]):
        A, B = f1.vectors(), f2.vectors()
        h = max(hausdorff(A, B), hausdorff(B, A))
        if f1.dimension != f2.dimension or h > NPF_ANGLE:
            jumps.append({"between": [_along(P, f1.basepoint), _along(P, f2.basepoint)], "dims": [f1.dimension, f2.dimension], "hausdorff": h})
    if jumps:
        outcome = FAILS
    elif any(d is None for d in dims):
        outcome = INCONCLUSIVE
    else:
        outcome = HOLDS
    details = {"grid": [_along(P, f.basepoint) for f in fibers], "dimensions": dims, "jumps": jumps}
    return ConeCheck("npf", outcome, details, (NPF_NOTE,))


@dataclass(frozen=True)
class C1Evidence:
    verdict: str
    per_point: tuple  # dicts with along, spread, unique, witnesses
    notes: tuple = ()


def _limit_plane(P, geoms, k):
    """Limit of the tangent planes along a curve, from entrywise limits of the projector."""
    mats = []
    for g in geoms:
        F = np.array([[float(c) for c in v] for v in g.TY.frame])
        mats.append(F.T @ F)
    if len(mats) < 8:
        return None
    n = mats[0].shape[0]
    L = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            est = classify_limit([m[i, j] for m in mats])
            if est.kind != CONVERGED:
                return None
            L[i, j] = est.value
    w, V = np.linalg.eigh(0.5 * (L + L.T))
    frame = V[:, np.argsort(w)[::-1][:k]].T
    return orthonormalize([list(r) for r in frame], n)


def _plane_angle(A: Subspace, B: Subspace) -> float:
    return math.asin(min(1.0, float(delta(A, B))))


def c1_boundary_evidence(P: PairAtPoint, x0_grid) -> C1Evidence:
    """Uniqueness of the limiting tangent plane at each grid point and its continuity."""
    if P.Y.dim != P.X.dim + 1:
        raise ValueError("needs dim Y = dim X + 1")
    rows, planes = [], []
    for x0 in sorted(x0_grid, key=lambda x: _along(P, x)):
        Q = _at(P, x0)
        lims = []
        for c in Q.family():
            T = _limit_plane(Q, Q.curve_geoms(c), Q.Y.dim)
            if T is not None:
                lims.append((c.label, T))
        spread, pair = 0.0, None
        for i in range(len(lims)):
            for j in range(i + 1, len(lims)):
                a = _plane_angle(lims[i][1], lims[j][1])
                if a > spread:
                    spread, pair = a, (lims[i][0], lims[j][0])
        unique = bool(lims) and spread < C1_SPREAD
        rows.append({"along": _along(P, x0), "spread": spread, "unique": unique, "witnesses": pair, "curves": len(lims)})
        planes.append(lims[0][1] if unique else None)
    continuous = True
    for r1, r2, T1, T2 in zip(rows, rows[1:], planes, planes[1:]):
        if T1 is not None and T2 is not None and _plane_angle(T1, T2) > NPF_ANGLE:
            continuous = False
            r2["jump_from"] = r1["along"]
    ok = all(r["unique"] for r in rows) and continuous
    return C1Evidence(
        EVIDENCE_FOR if ok else EVIDENCE_AGAINST,
        tuple(rows),
        ("numerical evidence only: unique limit tangent planes along the probe family and their continuity along the grid",),
    )


def directions_csv(fiber: ConeFiber) -> str:
    """CSV of limit directions: curve label, components, classification."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = len(fiber.directions[0][1]) if fiber.directions else 0
    w.writerow(["curve"] + [f"d{i}" for i in range(n)] + ["classification"])
    for label, d, cls in fiber.directions:
        w.writerow([label] + [f"{c:.12g}" for c in d] + [cls])
    for label, why in fiber.excluded:
        w.writerow([label] + [""] * n + [f"excluded: {why}"])
    return buf.getvalue()
