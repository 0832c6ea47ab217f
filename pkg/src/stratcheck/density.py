"""Monte Carlo Hausdorff measure of ball truncations, densities and profiles."""

from __future__ import annotations

import csv
import io
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .expr import EvalDomainError
from .probes import CONVERGED, classify_limit
from .program import compile_expr

__all__ = [
    "MCConfig",
    "PsiEstimate",
    "DensityEstimate",
    "DensityProfile",
    "mu",
    "psi",
    "psi_grid",
    "theta",
    "density_profile",
    "profile_csv",
    "default_threads",
    "DEFAULT_U_GRID",
    "DEEP_U_GRID",
]

DEFAULT_U_GRID = tuple(2.0**-k for k in range(4, 10))
# flat sets decay like u^{x0^2} off the singular point, so the deep grid runs
# to the bottom of the double range (the ratio is formed without u^k)
DEEP_U_GRID = tuple(10.0 ** (-25 * k) for k in range(1, 13))
BATCH = 1 << 16


def default_threads() -> int:
    env = os.environ.get("STRATCHECK_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"STRATCHECK_THREADS must be an integer, got {env!r}") from None
    return 1


@dataclass(frozen=True)
class MCConfig:
    N: int = 1_000_000
    seed: int = 51966
    threads: int | None = None
    backend: str | None = None
    tol: float = 1e-3
    # samples where the expression cannot be evaluated (cancellation near the
    # boundary) are dropped up to this fraction of N, otherwise psi raises
    max_bad_fraction: float = 1e-3

    @classmethod
    def from_dict(cls, d: dict | None) -> "MCConfig":
        d = dict(d or {})
        d.pop("grid", None)
        return cls(**{k: v for k, v in d.items() if k in ("N", "seed", "threads", "backend", "tol", "max_bad_fraction")})


def mu(k: int) -> float:
    """Volume of the unit k-ball."""
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


@dataclass(frozen=True)
class PsiEstimate:
    value: float
    stderr: float
    hits: int
    dropped: int = 0
    # psi / (mu_k u^k) formed without u^k, which underflows for tiny radii
    ratio: float = 0.0
    ratio_stderr: float = 0.0


def _batches(N):
    full, rest = divmod(N, BATCH)
    return [BATCH] * full + ([rest] if rest else [])


def _offsets(seed, b, n, k):
    rng = np.random.default_rng([seed, b])
    return rng.uniform(-1.0, 1.0, size=(n, k))


def _in_box(domain, names, c, u, s):
    keep = np.ones(len(s), dtype=bool)
    for j, name in enumerate(names):
        iv = domain.get(name)
        if iv is None:
            continue
        v = c[j] + u * s[:, j]
        keep &= (v >= iv.lo) if iv.closed_lo else (v > iv.lo)
        keep &= (v <= iv.hi) if iv.closed_hi else (v < iv.hi)
        if iv.exclude_zero:
            keep &= v != 0
    return keep


class _Integrand:
    """Per-batch sums for one stratum and centre, over all radii at once."""

    def __init__(self, A, center, backend):
        self.A = A
        self.backend = backend
        c = [float(v) for v in center]
        if len(c) != A.ambient_dim:
            raise ValueError("centre has the wrong dimension")
        if A.kind == "graph":
            self.k = A.dim
            self.prog = compile_expr(A.expr, A.params)
            self.cp = np.array([c[A.layout.index(p)] for p in A.params])
            self.ch = c[A.layout.index("h")]
        elif A.kind == "region":
            self.k = A.ambient_dim
            self.prog = compile_expr(A.expr, A.params)
            self.cols = np.array([A.layout.index(p) for p in A.params], dtype=np.int64)
            self.bcol = A.layout.index(A.bounded)
            self.c = np.array(c)
        else:
            raise ValueError(f"density of {A.kind} strata is not supported")

    def sums(self, s, u):
        """(sum w, sum w^2, nonzero, dropped) for one batch of unit-box offsets at radius u."""
        A = self.A
        if A.kind == "graph":
            keep = _in_box(A.domain, A.params, self.cp, u, s)
            sub = np.ascontiguousarray(s[keep])
            sw, sw2, bad = kernels.graph_moments(self.prog, sub, self.cp, self.ch, u, self.backend, return_bad=True)
            return sw, sw2, int(sw > 0), bad
        keep = _in_box(A.domain, A.params, self.c[self.cols], u, s[:, self.cols])
        sub = np.ascontiguousarray(s[keep])
        hits, bad = kernels.region_count(self.prog, sub, self.cols, self.bcol, self.c, A.lower, u, self.backend, return_bad=True)
        return float(hits), float(hits), hits, bad


def psi_grid(A, center, u_grid, mc: MCConfig | None = None):
    """psi(A; u) for every u, with common random numbers across radii."""
    mc = mc or MCConfig()
    integ = _Integrand(A, center, mc.backend)
    k = integ.k
    sizes = _batches(mc.N)
    threads = mc.threads or default_threads()

    def work(b):
        s = _offsets(mc.seed, b, sizes[b], k)
        return [integ.sums(s, u) for u in u_grid]

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(work, range(len(sizes))))
    else:
        parts = [work(b) for b in range(len(sizes))]
    out = []
    for j, u in enumerate(u_grid):
        # merge in fixed batch order
        sw = sw2 = 0.0
        hits = bad = 0
        for p in parts:
            sw += p[j][0]
            sw2 += p[j][1]
            hits += int(p[j][2])
            bad += int(p[j][3])
        N = mc.N
        if bad > mc.max_bad_fraction * N:
            raise EvalDomainError(f"{bad} of {N} Monte Carlo samples of {A.name} at u={u:g} are outside the function domain", None)
        box = (2.0 * u) ** k
        mean = sw / N
        var = max(sw2 / N - mean * mean, 0.0)
        if hits == 0:
            warnings.warn(f"no Monte Carlo hits for {A.name} at u={u:g}; psi reported as 0", RuntimeWarning)
        se = math.sqrt(var / N)
        scale = 2.0**k / mu(k)
        out.append(PsiEstimate(box * mean, box * se, hits, bad, scale * mean, scale * se))
    return out


def psi(A, center, u: float, mc: MCConfig | None = None) -> PsiEstimate:
    if u <= 0:
        raise ValueError("u must be positive")
    return psi_grid(A, center, [u], mc)[0]


@dataclass(frozen=True)
class DensityEstimate:
    center: tuple
    theta: float | None
    stderr: float
    u_grid: tuple
    values: tuple
    stderrs: tuple
    classification: str
    k: int
    dropped: int = 0

    def __str__(self):
        if self.theta is None:
            return f"theta inconclusive ({self.classification})"
        return f"{self.theta:.4f} ± {self.stderr:.4f}"


def theta(A, center, u_grid=DEFAULT_U_GRID, mc: MCConfig | None = None) -> DensityEstimate:
    """Density of A at ``center``: limit of psi/(mu_k u^k) over a decreasing u-grid."""
    mc = mc or MCConfig()
    u_grid = tuple(float(u) for u in u_grid)
    if len(u_grid) < 5:
        raise ValueError("u_grid needs at least 5 radii")
    if any(b >= a for a, b in zip(u_grid, u_grid[1:])):
        raise ValueError("u_grid must be strictly decreasing")
    k = A.dim
    ests = psi_grid(A, center, u_grid, mc)
    vals = tuple(e.ratio for e in ests)
    ses = tuple(e.ratio_stderr for e in ests)
    tol = max(mc.tol, 4.0 * max(ses[-4:]))
    lim = classify_limit(vals, tol, min_samples=5)
    th = vals[-1] if lim.kind == CONVERGED else None
    dropped = sum(e.dropped for e in ests)
    return DensityEstimate(tuple(float(c) for c in center), th, ses[-1], u_grid, vals, ses, lim.kind, k, dropped)


@dataclass(frozen=True)
class DensityProfile:
    stratum: str
    estimates: tuple
    jumps: tuple  # (index_left, index_right, difference, combined stderr)

    @property
    def jump(self) -> bool:
        return bool(self.jumps)


def _level(e: DensityEstimate) -> float:
    return e.theta if e.theta is not None else e.values[-1]


def density_profile(A, X, grid, u_grid=DEFAULT_U_GRID, mc: MCConfig | None = None) -> DensityProfile:
    """theta along points of X; a jump is flagged when neighbours differ by > 3 combined stderr."""
    pts = []
    for g in grid:
        if isinstance(g, (int, float)):
            p = [o + float(g) * b for o, b in zip(X.offset, X.basis[0])]
        else:
            p = [float(c) for c in g]
        pts.append(tuple(p))
    ests = [theta(A, p, u_grid, mc) for p in pts]
    order = sorted(range(len(pts)), key=lambda i: sum((c - o) * b for c, o, b in zip(pts[i], X.offset, X.basis[0])))
    jumps = []
    for i, j in zip(order, order[1:]):
        d = abs(_level(ests[i]) - _level(ests[j]))
        se = math.hypot(ests[i].stderr, ests[j].stderr)
        if d > 3.0 * se:
            jumps.append((i, j, d, se))
    return DensityProfile(A.name, tuple(ests), tuple(jumps))


def profile_csv(profile: DensityProfile) -> str:
    """CSV with columns point, theta, stderr and one column per radius."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if not profile.estimates:
        w.writerow(["point", "theta", "stderr"])
        return buf.getvalue()
    us = profile.estimates[0].u_grid
    w.writerow(["point", "theta", "stderr"] + [f"u={u:.6g}" for u in us])
    for e in profile.estimates:
        th = "" if e.theta is None else f"{e.theta:.12g}"
        w.writerow([" ".join(f"{c:g}" for c in e.center), th, f"{e.stderr:.12g}"] + [f"{v:.12g}" for v in e.values])
    return buf.getvalue()
