"""Linear-subspace geometry: frames, eta, delta and tangent planes of graphs.

Vectors are plain sequences whose entries are floats or
:class:`~stratcheck.numscale.XScalar`; every routine here is written against
the arithmetic operators only, so the same code serves both scalar systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .expr import EXTENDED, STANDARD, Expr, eval_jet
from .numscale import XScalar, xnorm, xsqrt

__all__ = [
    "Subspace",
    "RankDeficiencyError",
    "DimensionError",
    "orthonormalize",
    "eta",
    "delta",
    "singular_values",
    "tangent_of_graph",
    "norm",
    "dot",
    "unit",
    "angle_between",
]

RANK_TOL = 1e-10
JACOBI_TOL = 1e-13


class RankDeficiencyError(ValueError):
    pass


class DimensionError(ValueError):
    pass


def _sqrt(v):
    return xsqrt(v) if isinstance(v, XScalar) else math.sqrt(v)


def _is_x(vec):
    return any(isinstance(c, XScalar) for c in vec)


def dot(a, b):
    s = 0.0
    for x, y in zip(a, b):
        s = x * y + s
    return s


def norm(v):
    if _is_x(v):
        return xnorm(v)
    return math.hypot(*v)


def unit(v):
    n = norm(v)
    if n == 0:
        raise ZeroDivisionError("zero vector has no direction")
    return [c / n for c in v]


def _sub_scaled(v, s, w):
    return [a - s * b for a, b in zip(v, w)]


def _to_float_vec(v):
    return [float(c) for c in v]


def angle_between(a, b) -> float:
    """Angle in radians between two nonzero vectors (float result)."""
    a, b = _to_float_vec(unit(a)), _to_float_vec(unit(b))
    # atan2 of |a x b|-type quantity is stable near 0 and pi
    d = [x - y for x, y in zip(a, b)]
    s = [x + y for x, y in zip(a, b)]
    return 2.0 * math.atan2(math.hypot(*d), math.hypot(*s))


@dataclass(frozen=True)
class Subspace:
    ambient_dim: int
    frame: tuple

    @property
    def dim(self):
        return len(self.frame)

    def project(self, v):
        out = [0.0 * c for c in v]
        for b in self.frame:
            c = dot(v, b)
            out = [o + c * x for o, x in zip(out, b)]
        return out

    def residual(self, v):
        """Component of ``v`` orthogonal to the subspace."""
        r = list(v)
        for b in self.frame:
            r = _sub_scaled(r, dot(r, b), b)
        return r

    def contains(self, v, tol=1e-10):
        return float(norm(self.residual(v))) <= tol * max(1.0, float(norm(v)))


def orthonormalize(vectors, ambient_dim: int | None = None, rank_tol: float = RANK_TOL) -> Subspace:
    """Modified Gram-Schmidt with one re-orthogonalization pass."""
    vecs = [list(v) for v in vectors]
    if ambient_dim is None:
        if not vecs:
            raise ValueError("ambient_dim required for an empty frame")
        ambient_dim = len(vecs[0])
    frame = []
    for v in vecs:
        if len(v) != ambient_dim:
            raise DimensionError(f"vector of length {len(v)} in ambient dimension {ambient_dim}")
        n0 = norm(v)
        w = v
        for _ in range(2):
            for q in frame:
                w = _sub_scaled(w, dot(w, q), q)
        n1 = norm(w)
        if n0 == 0 or n1 <= rank_tol * n0:
            raise RankDeficiencyError("vectors are linearly dependent within tolerance")
        frame.append(tuple(c / n1 for c in w))
    if len(frame) > ambient_dim:
        raise RankDeficiencyError("more vectors than ambient dimension")
    return Subspace(ambient_dim, tuple(frame))


def eta(v, B: Subspace):
    """Length of the component of ``v`` orthogonal to ``B``."""
    if len(v) != B.ambient_dim:
        raise DimensionError("vector and subspace live in different spaces")
    return norm(B.residual(v))


def singular_values(columns, tol: float = JACOBI_TOL, max_sweeps: int = 60):
    """Singular values of the matrix with the given columns (one-sided Jacobi)."""
    cols = [list(c) for c in columns]
    k = len(cols)
    for _ in range(max_sweeps):
        rotated = False
        for i in range(k - 1):
            for j in range(i + 1, k):
                a = dot(cols[i], cols[i])
                b = dot(cols[j], cols[j])
                c = dot(cols[i], cols[j])
                if c == 0 or abs(c) <= tol * _sqrt(a * b):
                    continue
                rotated = True
                zeta = (b - a) / (c + c)
                sgn = 1.0 if zeta >= 0 else -1.0
                az = abs(zeta)
                # for huge zeta the rotation is tiny: t ~ 1/(2 zeta)
                t = sgn / (az + _sqrt(1.0 + az * az)) if az < 1e150 else sgn / (2.0 * az)
                cs = 1.0 / _sqrt(1.0 + t * t)
                sn = cs * t
                ci, cj = cols[i], cols[j]
                cols[i] = [cs * x - sn * y for x, y in zip(ci, cj)]
                cols[j] = [sn * x + cs * y for x, y in zip(ci, cj)]
        if not rotated:
            break
    return sorted((norm(c) for c in cols), reverse=True)


def delta(A: Subspace, B: Subspace):
    """sup over unit v in A of eta(v, B): the top singular value of (I - P_B) restricted to A."""
    if A.ambient_dim != B.ambient_dim:
        raise DimensionError("subspaces live in different spaces")
    if A.dim == 0:
        return 0.0
    cols = [B.residual(a) for a in A.frame]
    s = singular_values(cols)[0]
    if s > 1.0:
        s = s / s  # clamp rounding overshoot, keeping the scalar type
    return s


def tangent_of_graph(h: Expr, base_vars, point, layout, scalar_system=STANDARD) -> Subspace:
    """Tangent plane of the graph of ``h`` at ``point``.

    ``base_vars`` are the parameters of the graph, ``point`` binds them, and
    ``layout`` lists the ambient coordinates, each a parameter name or ``"h"``.
    """
    jet = eval_jet(h, point, scalar_system)
    grad = dict(zip(h.free_vars, jet.gradient))
    zero = XScalar(0) if scalar_system == EXTENDED else 0.0
    one = XScalar(1, 0.0) if scalar_system == EXTENDED else 1.0
    vecs = []
    for p in base_vars:
        v = []
        for coord in layout:
            if coord == "h":
                v.append(grad.get(p, zero))
            else:
                v.append(one if coord == p else zero)
        vecs.append(v)
    return orthonormalize(vecs, len(layout))
