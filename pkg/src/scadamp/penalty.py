"""SCAD penalty and its one-dimensional thresholding maps.

The scalar problem behind every solver in this package is

    phi(x; s2, R) = J(x) + (x - R)**2 / (2 * s2)

whose minimizer is ``f_a(s2, R)``. ``f_c`` is ``s2 * d f_a / dR``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class DegenerateCurvature(ValueError):
    """The one-body problem lost strict convexity (``s2 >= a - 1``)."""


class Region(enum.IntEnum):
    ZERO = 0
    I = 1
    II = 2
    III = 3


@dataclass(frozen=True)
class ScadParams:
    """SCAD shape parameters.

    Attributes:
        lam: threshold scale, ``lam > 0``.
        a: nonconvexity knob, ``a > 1``. ``a -> inf`` recovers the l1 penalty.
    """

    lam: float
    a: float

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not (self.a > 1):
            raise ValueError(f"a must exceed 1, got {self.a}")

    @property
    def cap(self) -> float:
        """Value of the penalty beyond ``a * lam``."""
        return 0.5 * (self.a + 1.0) * self.lam**2


def penalty(x, p: ScadParams):
    """Elementwise SCAD penalty J(x)."""
    ax = np.abs(np.asarray(x, dtype=float))
    lam, a = p.lam, p.a
    mid = -(ax**2 - 2.0 * a * lam * ax + lam**2) / (2.0 * (a - 1.0))
    out = np.where(ax <= lam, lam * ax, np.where(ax <= a * lam, mid, p.cap))
    return out if out.ndim else float(out)


def vector_penalty(x, p: ScadParams) -> float:
    """Sum of the SCAD penalty over the entries of ``x``."""
    return float(np.sum(penalty(np.asarray(x, dtype=float).ravel(), p)))


def soft_threshold(z, t):
    """S(z, t) = sign(z) * max(|z| - t, 0)."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("threshold must be nonnegative")
    z = np.asarray(z, dtype=float)
    out = np.sign(z) * np.maximum(np.abs(z) - t, 0.0)
    return out if out.ndim else float(out)


def _check_sigma2(sigma2, p: ScadParams):
    s2 = np.asarray(sigma2, dtype=float)
    if np.any(s2 <= 0):
        raise ValueError("sigma2 must be positive")
    if np.any(s2 >= p.a - 1.0):
        raise DegenerateCurvature(
            f"sigma2={np.max(s2):.6g} >= a-1={p.a - 1.0:.6g}: "
            "region II has no interior minimizer"
        )
    return s2


def classify_region(sigma2, R, p: ScadParams):
    """Region tag(s) of ``R`` for the one-body problem with variance ``sigma2``.

    ZERO: |R| <= lam*s2; I: up to lam*(1+s2); II: up to a*lam; III: beyond.
    """
    s2 = np.asarray(sigma2, dtype=float)
    if np.any(s2 <= 0):
        raise ValueError("sigma2 must be positive")
    r = np.abs(np.asarray(R, dtype=float))
    lam = p.lam
    tag = np.select(
        [r <= lam * s2, r <= lam * (1.0 + s2), r <= p.a * lam],
        [Region.ZERO, Region.I, Region.II],
        default=Region.III,
    )
    return Region(int(tag)) if tag.ndim == 0 else tag


def region_II_gain(sigma2, p: ScadParams):
    """Slope of f_a in R on region II, ``1 / (1 - s2/(a-1))``."""
    return 1.0 / (1.0 - np.asarray(sigma2, dtype=float) / (p.a - 1.0))


def _tables(s2: float, p: ScadParams):
    # region edges in |R| and the per-region slope/offset of |f_a|
    lam, a = p.lam, p.a
    gain = 1.0 / (1.0 - s2 / (a - 1.0))
    edges = np.array([lam * s2, lam * (1.0 + s2), a * lam])
    slope = np.array([0.0, 1.0, gain, 1.0])
    offset = np.array([0.0, lam * s2, gain * s2 * a * lam / (a - 1.0), 0.0])
    return edges, slope, offset


def prox_pair(sigma2: float, R, p: ScadParams):
    """(f_a, f_c) for a scalar ``sigma2`` and array ``R``, sharing one region lookup."""
    s2 = float(_check_sigma2(sigma2, p))
    R = np.asarray(R, dtype=float)
    edges, slope, offset = _tables(s2, p)
    r = np.abs(R)
    k = np.searchsorted(edges, r, side="left")
    fa = np.sign(R) * (slope[k] * r - offset[k])
    return fa, s2 * slope[k]


def f_a(sigma2, R, p: ScadParams):
    """Minimizer of J(x) + (x - R)^2 / (2 sigma2).

    Raises:
        DegenerateCurvature: if ``sigma2 >= a - 1``.
    """
    s2 = _check_sigma2(sigma2, p)
    if s2.ndim == 0:
        out = prox_pair(float(s2), R, p)[0]
        return out if out.ndim else float(out)
    R = np.asarray(R, dtype=float)
    lam, a = p.lam, p.a
    r = np.abs(R)
    sgn = np.sign(R)
    reg1 = R - lam * s2 * sgn
    reg2 = (R / s2 - a * lam / (a - 1.0) * sgn) / (1.0 / s2 - 1.0 / (a - 1.0))
    out = np.select(
        [r <= lam * s2, r <= lam * (1.0 + s2), r <= a * lam],
        [0.0 * R, reg1, reg2],
        default=R,
    )
    return out if out.ndim else float(out)


def f_c(sigma2, R, p: ScadParams):
    """Posterior variance map: ``sigma2 * d f_a / dR`` (0 on the zero region)."""
    s2 = _check_sigma2(sigma2, p)
    if s2.ndim == 0:
        out = prox_pair(float(s2), R, p)[1]
        return out if out.ndim else float(out)
    R = np.asarray(R, dtype=float)
    s2b = np.broadcast_to(s2, np.broadcast(s2, R).shape)
    r = np.abs(R)
    lam, a = p.lam, p.a
    mid = 1.0 / (1.0 / s2b - 1.0 / (a - 1.0))
    out = np.select(
        [r <= lam * s2b, r <= lam * (1.0 + s2b), r <= a * lam],
        [np.zeros_like(s2b), s2b, mid],
        default=s2b,
    )
    return out if out.ndim else float(out)


def single_body_oracle(sigma2, R, p: ScadParams, resolution: float = 1e-6,
                       grid_points: int = 2001):
    """Brute-force minimizer of phi(x; sigma2, R), for testing ``f_a``.

    A uniform grid over ``[-(|R| + a lam), |R| + a lam]`` locates the best
    cell, then golden-section search inside the two neighbouring cells
    shrinks the bracket below ``resolution``. Vectorized over broadcast
    ``sigma2`` and ``R``.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    s2, R = np.broadcast_arrays(np.asarray(sigma2, float), np.asarray(R, float))
    s2 = s2.ravel()[:, None]
    Rf = R.ravel()[:, None]

    def phi(x):
        return penalty(x, p) + (x - Rf) ** 2 / (2.0 * s2)

    half = np.abs(Rf) + p.a * p.lam
    u = np.linspace(-1.0, 1.0, grid_points)[None, :]
    grid = half * u
    k = np.argmin(phi(grid), axis=1)
    step = half[:, 0] * (u[0, 1] - u[0, 0])
    lo = grid[np.arange(len(k)), k] - step
    hi = grid[np.arange(len(k)), k] + step

    g = (np.sqrt(5.0) - 1.0) / 2.0
    lo, hi = lo[:, None], hi[:, None]
    x1 = hi - g * (hi - lo)
    x2 = lo + g * (hi - lo)
    f1, f2 = phi(x1), phi(x2)
    while np.max(hi - lo) > resolution * 1e-3:
        left = f1 <= f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        x2n = np.where(left, x1, lo + g * (hi - lo))
        x1n = np.where(left, hi - g * (hi - lo), x2)
        f1n = np.where(left, phi(x1n), f2)
        f2n = np.where(left, f1, phi(x2n))
        x1, x2, f1, f2 = x1n, x2n, f1n, f2n
    xs = 0.5 * (lo + hi)
    # phi has a kink at 0; keep the origin if it beats the refined point
    xs = np.where(phi(np.zeros_like(xs)) <= phi(xs), 0.0, xs)
    out = xs[:, 0].reshape(R.shape)
    return out if out.ndim else float(out)
