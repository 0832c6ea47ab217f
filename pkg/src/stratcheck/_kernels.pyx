# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch kernels.  Mirrors ``stratcheck.kernels._py_*`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, sqrt, fabs, sin, cos, pow, NAN

cnp.import_array()

DEF MAXSTACK = 64
DEF MAXVARS = 8

cdef enum:
    CONST, VAR, ADD, SUB, MUL, DIV, POWI, POW, NEG, EXP, LN, SQRT, ABS, SIN


cdef inline void _run(const int[:] ops, const double[:] args, int nops,
                      const double[:, :] pts, Py_ssize_t p, int nv,
                      double* val, double* grad) noexcept nogil:
    cdef double sv[MAXSTACK]
    cdef double sg[MAXSTACK][MAXVARS]
    cdef int sp = 0, i, k, n
    cdef double a, b, v, la, d
    for i in range(nops):
        if ops[i] == CONST:
            sv[sp] = args[i]
            for k in range(nv):
                sg[sp][k] = 0.0
            sp += 1
        elif ops[i] == VAR:
            n = <int>args[i]
            sv[sp] = pts[p, n]
            for k in range(nv):
                sg[sp][k] = 1.0 if k == n else 0.0
            sp += 1
        elif ops[i] == NEG:
            sv[sp - 1] = -sv[sp - 1]
            for k in range(nv):
                sg[sp - 1][k] = -sg[sp - 1][k]
        elif ops[i] == EXP:
            v = exp(sv[sp - 1])
            sv[sp - 1] = v
            for k in range(nv):
                sg[sp - 1][k] *= v
        elif ops[i] == LN:
            a = sv[sp - 1]
            if a <= 0.0:
                sv[sp - 1] = NAN
            else:
                sv[sp - 1] = log(a)
                for k in range(nv):
                    sg[sp - 1][k] /= a
        elif ops[i] == SQRT:
            a = sv[sp - 1]
            if a <= 0.0:
                sv[sp - 1] = NAN
            else:
                v = sqrt(a)
                sv[sp - 1] = v
                for k in range(nv):
                    sg[sp - 1][k] /= (2.0 * v)
        elif ops[i] == ABS:
            a = sv[sp - 1]
            d = 1.0 if a > 0 else (-1.0 if a < 0 else 0.0)
            sv[sp - 1] = fabs(a)
            for k in range(nv):
                sg[sp - 1][k] *= d
        elif ops[i] == SIN:
            a = sv[sp - 1]
            d = cos(a)
            sv[sp - 1] = sin(a)
            for k in range(nv):
                sg[sp - 1][k] *= d
        elif ops[i] == POWI:
            n = <int>args[i]
            a = sv[sp - 1]
            if n == 0:
                sv[sp - 1] = 1.0
                for k in range(nv):
                    sg[sp - 1][k] = 0.0
            else:
                d = n * pow(a, n - 1) if n != 1 else 1.0
                sv[sp - 1] = pow(a, n)
                for k in range(nv):
                    sg[sp - 1][k] *= d
        else:
            sp -= 1
            a = sv[sp - 1]
            b = sv[sp]
            if ops[i] == ADD:
                sv[sp - 1] = a + b
                for k in range(nv):
                    sg[sp - 1][k] += sg[sp][k]
            elif ops[i] == SUB:
                sv[sp - 1] = a - b
                for k in range(nv):
                    sg[sp - 1][k] -= sg[sp][k]
            elif ops[i] == MUL:
                sv[sp - 1] = a * b
                for k in range(nv):
                    sg[sp - 1][k] = sg[sp - 1][k] * b + a * sg[sp][k]
            elif ops[i] == DIV:
                if b == 0.0:
                    sv[sp - 1] = NAN
                else:
                    v = a / b
                    sv[sp - 1] = v
                    for k in range(nv):
                        sg[sp - 1][k] = (sg[sp - 1][k] - v * sg[sp][k]) / b
            elif ops[i] == POW:
                if a <= 0.0:
                    sv[sp - 1] = NAN
                else:
                    la = log(a)
                    v = exp(b * la)
                    sv[sp - 1] = v
                    for k in range(nv):
                        sg[sp - 1][k] = v * (sg[sp][k] * la + b * sg[sp - 1][k] / a)
    val[0] = sv[0]
    for k in range(nv):
        grad[k] = sg[0][k]


def eval_batch(cnp.ndarray ops_arr, cnp.ndarray args_arr, int depth, cnp.ndarray points):
    """Values (N,) and gradients (N, nvars) of a compiled program at each row of ``points``."""
    cdef const int[:] ops = np.ascontiguousarray(ops_arr, dtype=np.int32)
    cdef const double[:] args = np.ascontiguousarray(args_arr, dtype=np.float64)
    cdef const double[:, :] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t npts = pts.shape[0], p
    cdef int nv = pts.shape[1], nops = ops.shape[0]
    if depth > MAXSTACK or nv > MAXVARS:
        raise ValueError("program too large for the compiled kernel")
    out_v = np.empty(npts, dtype=np.float64)
    out_g = np.empty((npts, nv), dtype=np.float64)
    cdef double[:] vv = out_v
    cdef double[:, :] gg = out_g
    with nogil:
        for p in range(npts):
            _run(ops, args, nops, pts, p, nv, &vv[p], &gg[p, 0] if nv > 0 else &vv[p])
    return out_v, out_g


def graph_moments(cnp.ndarray ops_arr, cnp.ndarray args_arr, int depth, cnp.ndarray offsets,
                  cnp.ndarray center_params, double center_h, double u):
    """Sum and sum of squares of the area integrand over scaled parameter offsets.

    A row ``s`` maps to parameters ``center_params + u*s``; it counts when
    ``|s|^2 + ((h - center_h)/u)^2 < 1`` with weight ``sqrt(1 + |grad h|^2)``.
    """
    cdef const int[:] ops = np.ascontiguousarray(ops_arr, dtype=np.int32)
    cdef const double[:] args = np.ascontiguousarray(args_arr, dtype=np.float64)
    cdef const double[:, :] s = np.ascontiguousarray(offsets, dtype=np.float64)
    cdef const double[:] c = np.ascontiguousarray(center_params, dtype=np.float64)
    cdef Py_ssize_t n = s.shape[0], p
    cdef int nv = s.shape[1], nops = ops.shape[0], k
    cdef double sw = 0.0, sw2 = 0.0, r2, hv, w, dh
    cdef double grad[MAXVARS]
    cdef int bad = 0
    if depth > MAXSTACK or nv > MAXVARS:
        raise ValueError("program too large for the compiled kernel")
    pts_arr = np.empty((1, nv), dtype=np.float64)
    cdef double[:, :] pts = pts_arr
    with nogil:
        for p in range(n):
            r2 = 0.0
            for k in range(nv):
                r2 += s[p, k] * s[p, k]
            if r2 >= 1.0:
                continue
            for k in range(nv):
                pts[0, k] = c[k] + u * s[p, k]
            _run(ops, args, nops, pts, 0, nv, &hv, grad)
            if hv != hv:
                bad += 1
                continue
            dh = (hv - center_h) / u
            if r2 + dh * dh >= 1.0:
                continue
            w = 1.0
            for k in range(nv):
                w += grad[k] * grad[k]
            w = sqrt(w)
            sw += w
            sw2 += w * w
    return sw, sw2, bad


def region_count(cnp.ndarray ops_arr, cnp.ndarray args_arr, int depth, cnp.ndarray offsets,
                 cnp.ndarray param_cols, int bounded_col, cnp.ndarray center, double lower, double u):
    """Count scaled ambient offsets inside the unit ball with ``lower <= coord <= h``."""
    cdef const int[:] ops = np.ascontiguousarray(ops_arr, dtype=np.int32)
    cdef const double[:] args = np.ascontiguousarray(args_arr, dtype=np.float64)
    cdef const double[:, :] s = np.ascontiguousarray(offsets, dtype=np.float64)
    cdef const long[:] pc = np.ascontiguousarray(param_cols, dtype=np.int64)
    cdef const double[:] c = np.ascontiguousarray(center, dtype=np.float64)
    cdef Py_ssize_t n = s.shape[0], p
    cdef int dim = s.shape[1], nv = pc.shape[0], nops = ops.shape[0], k
    cdef long hits = 0
    cdef double r2, hv, y
    cdef double grad[MAXVARS]
    cdef int bad = 0
    if depth > MAXSTACK or nv > MAXVARS:
        raise ValueError("program too large for the compiled kernel")
    pts_arr = np.empty((1, nv), dtype=np.float64)
    cdef double[:, :] pts = pts_arr
    with nogil:
        for p in range(n):
            r2 = 0.0
            for k in range(dim):
                r2 += s[p, k] * s[p, k]
            if r2 >= 1.0:
                continue
            y = c[bounded_col] + u * s[p, bounded_col]
            if y < lower:
                continue
            for k in range(nv):
                pts[0, k] = c[pc[k]] + u * s[p, pc[k]]
            _run(ops, args, nops, pts, 0, nv, &hv, grad)
            if hv != hv:
                bad += 1
                continue
            if y <= hv:
                hits += 1
    return hits, bad
