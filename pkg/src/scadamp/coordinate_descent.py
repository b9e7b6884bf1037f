"""Cyclic coordinate descent for SCAD-penalized least squares.

Each coordinate update exactly minimizes

    (1/2) ||r + A_j x_j - A_j x||^2 + J(x)  =  (n_j/2) (x - z_j/n_j)^2 + J(x) + const,

with ``n_j = ||A_j||^2`` and ``z_j = A_j^T r + n_j x_j``, so the new value is
``f_a(1/n_j, z_j/n_j)``. For unit-norm columns this is the familiar
three-branch rule: S(z, lam) for |z| <= 2 lam, S(z, a lam/(a-1)) / (1 - 1/(a-1))
up to a lam, and z beyond.

Also here: the multi-start divergence d(y, A), the empirical uniqueness
threshold a*, and the Gram-eigenvalue sufficient condition a > 1 + 1/c_min.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numba
import numpy as np

from .instance import Instance, make_rng, standard_normals
from .penalty import DegenerateCurvature, ScadParams, f_a
from .replica import NoSignChange


@dataclass(frozen=True)
class CdState:
    x: np.ndarray
    r: np.ndarray  # y - A x, maintained incrementally
    sweep: int = 0

    @classmethod
    def start(cls, inst: Instance, x0=None) -> "CdState":
        x = np.zeros(inst.N) if x0 is None else np.array(x0, dtype=float)
        return cls(x, inst.y - inst.A @ x, 0)


class CdResult(NamedTuple):
    x: np.ndarray
    converged: bool
    sweeps: int


class Divergence(NamedTuple):
    d: float
    used: int      # converged runs entering the average
    excluded: int  # runs that hit max_sweeps


def column_norms2(A: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->j", A, A)


def _check_curvature(norms2: np.ndarray, p: ScadParams) -> None:
    # the one-body problem with variance 1/n_j needs 1/n_j < a - 1
    if 1.0 / norms2.min() >= p.a - 1.0:
        raise DegenerateCurvature(
            f"a={p.a:.6g} needs to exceed 1 + 1/min||A_j||^2 = {1 + 1 / norms2.min():.6g}")


@numba.njit(cache=True)
def _prox(s2, R, lam, a):
    r = abs(R)
    if r <= lam * s2:
        return 0.0
    sgn = 1.0 if R > 0 else -1.0
    if r <= lam * (1.0 + s2):
        return R - sgn * lam * s2
    if r <= a * lam:
        return (R / s2 - sgn * a * lam / (a - 1.0)) / (1.0 / s2 - 1.0 / (a - 1.0))
    return R


@numba.njit(cache=True)
def _sweep(At, x, r, norms2, lam, a, reverse):
    N, M = At.shape
    big = 0.0
    for k in range(N):
        j = N - 1 - k if reverse else k
        col = At[j]
        z = 0.0
        for mu in range(M):
            z += col[mu] * r[mu]
        n = norms2[j]
        z += n * x[j]
        new = _prox(1.0 / n, z / n, lam, a)
        d = new - x[j]
        if d != 0.0:
            for mu in range(M):
                r[mu] -= d * col[mu]
            x[j] = new
            if abs(d) > big:
                big = abs(d)
    return big


@numba.njit(cache=True)
def _sweep_on(At, x, r, norms2, lam, a, idx):
    M = At.shape[1]
    big = 0.0
    for j in idx:
        col = At[j]
        z = 0.0
        for mu in range(M):
            z += col[mu] * r[mu]
        n = norms2[j]
        z += n * x[j]
        new = _prox(1.0 / n, z / n, lam, a)
        d = new - x[j]
        if d != 0.0:
            for mu in range(M):
                r[mu] -= d * col[mu]
            x[j] = new
            if abs(d) > big:
                big = abs(d)
    return big


@numba.njit(cache=True)
def _run(At, x, r, norms2, lam, a, tol, max_sweeps):
    # full sweep, then cycle on the nonzero set until it settles; stop only
    # when a full sweep moves nothing by more than tol
    s = 0
    while s < max_sweeps:
        s += 1
        if _sweep(At, x, r, norms2, lam, a, False) < tol:
            return True, s
        idx = np.flatnonzero(x)
        while s < max_sweeps:
            s += 1
            if _sweep_on(At, x, r, norms2, lam, a, idx) < tol:
                break
    return False, max_sweeps


class _Prepared:
    """Per-instance arrays reused across many CD runs."""

    def __init__(self, inst: Instance):
        self.At = np.ascontiguousarray(inst.A.T)
        self.norms2 = column_norms2(inst.A)
        self.y = inst.y
        self.A = inst.A

    def run(self, p: ScadParams, x0, tol, max_sweeps):
        x = np.array(x0, dtype=float)
        r = self.y - self.A @ x
        ok, sweeps = _run(self.At, x, r, self.norms2, float(p.lam), float(p.a),
                          float(tol), int(max_sweeps))
        return x, bool(ok), int(sweeps)


def cd_coordinate_update(j: int, s: CdState, inst: Instance, p: ScadParams) -> CdState:
    """Exact minimization over coordinate ``j`` with the others held fixed."""
    col = inst.A[:, j]
    n = float(col @ col)
    z = float(col @ s.r) + n * s.x[j]
    new = f_a(1.0 / n, z / n, p)
    d = new - s.x[j]
    if d == 0.0:
        return s
    x = s.x.copy()
    x[j] = new
    return CdState(x, s.r - d * col, s.sweep)


def cd_sweep(s: CdState, inst: Instance, p: ScadParams, reverse: bool = False):
    """One full cyclic pass. Returns ``(new_state, max |change|)``."""
    norms2 = column_norms2(inst.A)
    _check_curvature(norms2, p)
    x, r = s.x.copy(), s.r.copy()
    big = _sweep(np.ascontiguousarray(inst.A.T), x, r, norms2, float(p.lam), float(p.a), reverse)
    return CdState(x, r, s.sweep + 1), float(big)


def run_cd(inst: Instance, p: ScadParams, init=None, tol: float = 1e-10,
           max_sweeps: int = 100_000) -> CdResult:
    """Sweep j = 0..N-1 until the largest coordinate change in a sweep is below ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    x0 = np.zeros(inst.N) if init is None else np.asarray(init, dtype=float)
    if x0.shape != (inst.N,) or not np.all(np.isfinite(x0)):
        raise ValueError("init must be a finite N-vector")
    prep = _Prepared(inst)
    _check_curvature(prep.norms2, p)
    return CdResult(*prep.run(p, x0, tol, max_sweeps))


def _divergence(prep: _Prepared, p: ScadParams, inits: np.ndarray, tol: float,
                max_sweeps: int, stop_above: float | None) -> Divergence:
    m = len(inits)
    sols = []
    excluded = 0
    acc = 0.0
    for x0 in inits:
        x, ok, _ = prep.run(p, x0, tol, max_sweeps)
        if not ok:
            excluded += 1
            continue
        for other in sols:
            diff = x - other
            acc += float(diff @ diff)
        sols.append(x)
        # the mean can only be compared once all pairs are in; the running
        # sum already bounds it from below
        if stop_above is not None and acc > stop_above * m * (m - 1) / 2:
            return Divergence(np.inf, len(sols), excluded)
    k = len(sols)
    if k < 2:
        return Divergence(np.nan, k, excluded)
    return Divergence(2.0 * acc / (k * (k - 1)), k, excluded)


def _inits(inst: Instance, m: int, seed: int) -> np.ndarray:
    return standard_normals(make_rng(seed), (m, inst.N))


def multistart_divergence(inst: Instance, p: ScadParams, m: int = 100, seed: int = 0,
                          tol: float = 1e-10, max_sweeps: int = 20_000) -> Divergence:
    """Average pairwise squared distance between CD fixed points from ``m`` random starts.

    Starts are i.i.d. N(0, 1) vectors drawn from ``seed``. Runs that do not
    converge are left out of the average and counted in ``excluded``.
    """
    if m < 2:
        raise ValueError("need m >= 2 starts to form pairs")
    prep = _Prepared(inst)
    _check_curvature(prep.norms2, p)
    return _divergence(prep, p, _inits(inst, m, seed), tol, max_sweeps, None)


def a_lower_limit(inst: Instance) -> float:
    """Smallest a for which every coordinate problem is strictly convex."""
    return 1.0 + 1.0 / column_norms2(inst.A).min()


def a_star(inst: Instance, lam: float, bracket: tuple[float, float] | None = None,
           m: int = 100, seed: int = 0, d_tol: float = 1e-8, a_tol: float = 1e-2,
           cd_tol: float = 1e-10, max_sweeps: int = 20_000,
           unique_at_bottom: str = "raise") -> float:
    """Smallest a in ``bracket`` whose multi-start divergence is below ``d_tol``.

    Bisection on the indicator ``d < d_tol``, assumed monotone in a. The
    default bracket runs from just above the convexity limit to 100.

    Raises:
        NoSignChange: if d >= d_tol at the top of the bracket, or if d < d_tol
            already at the bottom and ``unique_at_bottom == "raise"``
            (pass ``"return"`` to get the bottom instead).
    """
    if unique_at_bottom not in ("raise", "return"):
        raise ValueError("unique_at_bottom must be 'raise' or 'return'")
    prep = _Prepared(inst)
    lo, hi = bracket if bracket is not None else (a_lower_limit(inst) + 1e-6, 100.0)
    if not lo < hi:
        raise ValueError("bracket must satisfy low < high")
    inits = _inits(inst, m, seed)

    def unique(a: float) -> bool:
        p = ScadParams(lam, a)
        _check_curvature(prep.norms2, p)
        d = _divergence(prep, p, inits, cd_tol, max_sweeps, d_tol)
        return d.used >= 2 and d.d < d_tol

    if not unique(hi):
        raise NoSignChange(f"fixed points still differ at a={hi}")
    if unique(lo):
        if unique_at_bottom == "raise":
            raise NoSignChange(f"fixed point already unique at a={lo}")
        return lo
    while hi - lo > a_tol:
        mid = 0.5 * (lo + hi)
        if unique(mid):
            hi = mid
        else:
            lo = mid
    return hi


class Sufficient(NamedTuple):
    holds: bool
    c_min: float
    support_size: int


def _grown_support(prep: _Prepared, lam: float, a: float, d_lambda: float | None,
                   tol: float, max_sweeps: int):
    """Support at lam and at the first lam - k*step where it has grown by one."""
    p = ScadParams(lam, a)
    x, _, _ = prep.run(p, np.zeros(len(prep.norms2)), tol, max_sweeps)
    base = int(np.count_nonzero(x))
    if d_lambda is not None:
        x2, _, _ = prep.run(ScadParams(lam - d_lambda, a), x, tol, max_sweeps)
        return np.flatnonzero(x2)
    step = lam / 1000.0
    cur, xs = lam, x
    for _ in range(999):
        nxt = cur - step
        xn, _, _ = prep.run(ScadParams(nxt, a), xs, tol, max_sweeps)
        k = int(np.count_nonzero(xn))
        if k == base + 1:
            return np.flatnonzero(xn)
        if k > base + 1:
            # overshoot: halve the step between cur and nxt a few times
            hi_l, lo_l = cur, nxt
            best = xn
            for _ in range(30):
                mid = 0.5 * (hi_l + lo_l)
                xm, _, _ = prep.run(ScadParams(mid, a), xs, tol, max_sweeps)
                km = int(np.count_nonzero(xm))
                if km == base + 1:
                    return np.flatnonzero(xm)
                if km > base + 1:
                    lo_l, best = mid, xm
                else:
                    hi_l = mid
            return np.flatnonzero(best)
        cur, xs = nxt, xn
    return np.flatnonzero(xs)


def sufficient_condition(inst: Instance, lam: float, a: float, d_lambda: float | None = None,
                         tol: float = 1e-10, max_sweeps: int = 100_000) -> Sufficient:
    """Check a > 1 + 1/c_min, c_min the smallest eigenvalue of A_K^T A_K.

    K is the CD support at ``lam - d_lambda``. With ``d_lambda=None`` lam is
    lowered on a grid of step lam/1000 (warm-started) until the support has
    grown by exactly one.
    """
    prep = _Prepared(inst)
    _check_curvature(prep.norms2, ScadParams(lam, a))
    K = _grown_support(prep, lam, a, d_lambda, tol, max_sweeps)
    if len(K) == 0:
        return Sufficient(True, np.inf, 0)
    AK = inst.A[:, K]
    c_min = float(np.linalg.eigvalsh(AK.T @ AK)[0])
    if c_min <= 0:
        return Sufficient(False, c_min, len(K))
    return Sufficient(bool(a > 1.0 + 1.0 / c_min), c_min, len(K))


def sufficient_a(inst: Instance, lam: float, a0: float, iters: int = 3, **kw) -> float:
    """Self-consistent a = 1 + 1/c_min(lam, a), by a few fixed-point steps from ``a0``."""
    a = a0
    for _ in range(iters):
        s = sufficient_condition(inst, lam, a, **kw)
        if not np.isfinite(s.c_min) or s.c_min <= 0:
            return np.inf if s.c_min <= 0 else a_lower_limit(inst)
        a_next = max(1.0 + 1.0 / s.c_min, a_lower_limit(inst) + 1e-6)
        if abs(a_next - a) < 1e-9:
            break
        a = a_next
    return a
