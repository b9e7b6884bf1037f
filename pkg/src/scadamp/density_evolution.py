"""Density evolution: the (V, E) recursion that tracks SCAD-AMP at large N.

    V' = (1/alpha) E_z[f_c(1 + V, z sqrt(E))]
    E' = (1/alpha) E_z[f_a(1 + V, z sqrt(E))^2] + sigma_y^2

Both expectations are evaluated exactly, since f_a is piecewise linear and
f_c piecewise constant in z.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .gaussian import gaussian_piecewise_moment, symmetric_moment  # noqa: F401
from .penalty import DegenerateCurvature, ScadParams


@dataclass(frozen=True)
class MacroState:
    V: float
    E: float


class DeResult(NamedTuple):
    state: MacroState
    converged: bool
    trajectory: list


def _z_thresholds(sigma2: float, E: float, p: ScadParams):
    sq = np.sqrt(E)
    return (p.lam * sigma2 / sq, p.lam * (1.0 + sigma2) / sq, p.a * p.lam / sq)


def prox_moments(sigma2: float, E: float, p: ScadParams) -> tuple[float, float]:
    """Return (E_z[f_c], E_z[f_a^2]) at R = z sqrt(E), z ~ N(0, 1)."""
    if sigma2 >= p.a - 1.0:
        raise DegenerateCurvature(f"sigma2={sigma2:.6g} >= a-1={p.a - 1.0:.6g}")
    if E <= 0.0:
        return 0.0, 0.0
    lam, a = p.lam, p.a
    sq = np.sqrt(E)
    t = _z_thresholds(sigma2, E, p)
    g = 1.0 / (1.0 / sigma2 - 1.0 / (a - 1.0))
    b = a * lam / (a - 1.0)
    k = g * sq / sigma2  # slope of f_a in z on region II
    fa2 = symmetric_moment(t, [
        (0.0, 0.0, 0.0),
        ((lam * sigma2) ** 2, -2.0 * lam * sigma2 * sq, E),
        ((g * b) ** 2, -2.0 * g * b * k, k * k),
        (0.0, 0.0, E),
    ])
    fc = symmetric_moment(t, [
        (0.0, 0.0, 0.0),
        (sigma2, 0.0, 0.0),
        (g, 0.0, 0.0),
        (sigma2, 0.0, 0.0),
    ])
    return fc, fa2


def de_step(s: MacroState, alpha: float, sigma_y: float, p: ScadParams) -> MacroState:
    """One undamped density-evolution update."""
    fc, fa2 = prox_moments(1.0 + s.V, s.E, p)
    return MacroState(V=fc / alpha, E=fa2 / alpha + sigma_y**2)


def de_fixed_point(alpha: float, sigma_y: float, p: ScadParams, tol: float = 1e-12,
                   max_iter: int = 100_000, damping: float = 0.0,
                   init: MacroState | None = None) -> DeResult:
    """Iterate ``de_step`` from (0, sigma_y^2) until |dV| + |dE| < tol.

    Non-convergence (including a step that hits ``1 + V >= a - 1``) is
    reported through ``converged=False``; the trajectory holds every state
    visited, starting with the initial one.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not 0.0 <= damping < 1.0:
        raise ValueError("damping must lie in [0, 1)")
    s = init if init is not None else MacroState(0.0, sigma_y**2)
    traj = [s]
    for _ in range(max_iter):
        try:
            new = de_step(s, alpha, sigma_y, p)
        except DegenerateCurvature:
            return DeResult(s, False, traj)
        if damping:
            new = MacroState(damping * s.V + (1 - damping) * new.V,
                             damping * s.E + (1 - damping) * new.E)
        delta = abs(new.V - s.V) + abs(new.E - s.E)
        s = new
        traj.append(s)
        if delta < tol:
            return DeResult(s, True, traj)
    return DeResult(s, False, traj)
