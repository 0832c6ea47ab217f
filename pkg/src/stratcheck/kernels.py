"""Batch jet evaluation over many points.

The compiled extension ``stratcheck._kernels`` is used when it was built;
otherwise the numpy implementation below runs.  Set ``STRATCHECK_PURE=1``
to force the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import program as P
from .expr import EvalDomainError, Expr
from .program import Program, compile_expr

__all__ = ["eval_batch", "eval_expr_batch", "graph_moments", "region_count", "BACKEND", "py_eval_batch"]


def py_eval_batch(ops, args, depth, points):
    points = np.asarray(points, dtype=np.float64)
    npts, nv = points.shape
    stack = []
    with np.errstate(all="ignore"):
        for op, arg in zip(ops.tolist(), args.tolist()):
            if op == P.CONST:
                stack.append((np.full(npts, arg), np.zeros((npts, nv))))
            elif op == P.VAR:
                n = int(arg)
                g = np.zeros((npts, nv))
                g[:, n] = 1.0
                stack.append((points[:, n].copy(), g))
            elif op == P.NEG:
                v, g = stack.pop()
                stack.append((-v, -g))
            elif op == P.EXP:
                v, g = stack.pop()
                e = np.exp(v)
                stack.append((e, g * e[:, None]))
            elif op == P.LN:
                v, g = stack.pop()
                bad = v <= 0
                stack.append((np.where(bad, np.nan, np.log(v)), g / v[:, None]))
            elif op == P.SQRT:
                v, g = stack.pop()
                bad = v <= 0
                s = np.sqrt(v)
                stack.append((np.where(bad, np.nan, s), g / (2.0 * s)[:, None]))
            elif op == P.ABS:
                v, g = stack.pop()
                stack.append((np.abs(v), g * np.sign(v)[:, None]))
            elif op == P.SIN:
                v, g = stack.pop()
                stack.append((np.sin(v), g * np.cos(v)[:, None]))
            elif op == P.POWI:
                v, g = stack.pop()
                n = int(arg)
                if n == 0:
                    stack.append((np.ones(npts), np.zeros((npts, nv))))
                else:
                    d = n * v ** (n - 1) if n != 1 else np.ones(npts)
                    stack.append((v**n, g * d[:, None]))
            else:
                b, gb = stack.pop()
                a, ga = stack.pop()
                if op == P.ADD:
                    stack.append((a + b, ga + gb))
                elif op == P.SUB:
                    stack.append((a - b, ga - gb))
                elif op == P.MUL:
                    stack.append((a * b, ga * b[:, None] + a[:, None] * gb))
                elif op == P.DIV:
                    v = np.where(b == 0, np.nan, a / b)
                    stack.append((v, (ga - v[:, None] * gb) / b[:, None]))
                elif op == P.POW:
                    la = np.log(a)
                    v = np.where(a <= 0, np.nan, np.exp(b * la))
                    stack.append((v, v[:, None] * (gb * la[:, None] + (b / a)[:, None] * ga)))
                else:
                    raise ValueError(f"bad opcode {op}")
    v, g = stack.pop()
    return v, g


BACKEND = "python"
_compiled = None
if os.environ.get("STRATCHECK_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:  # extension not built
        _compiled = None


def eval_batch(prog: Program, points, backend: str | None = None):
    """Return ``(values, gradients)`` of ``prog`` at each row of ``points``.

    Rows are ordered by ``prog.free_vars``.  Any non-finite output raises
    :class:`EvalDomainError`.
    """
    backend = backend or BACKEND
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != prog.nvars:
        raise ValueError(f"points must have shape (N, {prog.nvars})")
    if backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        v, g = _compiled.eval_batch(prog.ops, prog.args, prog.depth, pts)
    else:
        v, g = py_eval_batch(prog.ops, prog.args, prog.depth, pts)
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(g))):
        bad = int(np.argmax(~np.isfinite(v) | ~np.all(np.isfinite(g), axis=1)))
        raise EvalDomainError(f"non-finite value at batch row {bad} {pts[bad].tolist()}", None)
    return v, g


def eval_expr_batch(e: Expr, points, backend: str | None = None):
    return eval_batch(compile_expr(e), points, backend)


def py_graph_moments(ops, args, depth, offsets, center_params, center_h, u):
    s = np.asarray(offsets, dtype=np.float64)
    r2 = np.einsum("ij,ij->i", s, s)
    inside = r2 < 1.0
    s_in = s[inside]
    pts = np.asarray(center_params, dtype=np.float64)[None, :] + u * s_in
    h, g = py_eval_batch(ops, args, depth, pts)
    bad = ~np.isfinite(h)
    dh = (h - center_h) / u
    hit = ~bad & (r2[inside] + dh * dh < 1.0)
    w = np.sqrt(1.0 + np.einsum("ij,ij->i", g[hit], g[hit]))
    return float(w.sum()), float((w * w).sum()), int(bad.sum())


def py_region_count(ops, args, depth, offsets, param_cols, bounded_col, center, lower, u):
    s = np.asarray(offsets, dtype=np.float64)
    c = np.asarray(center, dtype=np.float64)
    r2 = np.einsum("ij,ij->i", s, s)
    y = c[bounded_col] + u * s[:, bounded_col]
    keep = (r2 < 1.0) & (y >= lower)
    cols = np.asarray(param_cols, dtype=np.int64)
    pts = c[cols][None, :] + u * s[keep][:, cols]
    h, _ = py_eval_batch(ops, args, depth, pts)
    bad = ~np.isfinite(h)
    hits = int(np.count_nonzero(~bad & (y[keep] <= h)))
    return hits, int(bad.sum())


def graph_moments(prog: Program, offsets, center_params, center_h, u, backend=None, return_bad=False):
    """``(sum w, sum w^2)`` of the area integrand; see ``_kernels.graph_moments``.

    Samples where the expression is undefined raise, unless ``return_bad`` is
    set, in which case their count is returned as a third element.
    """
    backend = backend or BACKEND
    if backend == "compiled":
        sw, sw2, bad = _compiled.graph_moments(
            prog.ops, prog.args, prog.depth, offsets, np.asarray(center_params, float), float(center_h), float(u)
        )
    else:
        sw, sw2, bad = py_graph_moments(prog.ops, prog.args, prog.depth, offsets, center_params, center_h, u)
    if return_bad:
        return sw, sw2, bad
    if bad:
        raise EvalDomainError(f"{bad} Monte Carlo samples fell outside the function domain", None)
    return sw, sw2


def region_count(prog: Program, offsets, param_cols, bounded_col, center, lower, u, backend=None, return_bad=False):
    """Number of scaled offsets inside the ball and the region ``lower <= coord <= h``."""
    backend = backend or BACKEND
    if backend == "compiled":
        hits, bad = _compiled.region_count(
            prog.ops, prog.args, prog.depth, offsets, np.asarray(param_cols, np.int64),
            int(bounded_col), np.asarray(center, float), float(lower), float(u)
        )
    else:
        hits, bad = py_region_count(prog.ops, prog.args, prog.depth, offsets, param_cols, bounded_col, center, lower, u)
    if return_bad:
        return hits, bad
    if bad:
        raise EvalDomainError(f"{bad} Monte Carlo samples fell outside the function domain", None)
    return hits
