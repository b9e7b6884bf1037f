"""Replica-symmetric saddle point for SCAD regression and its AT stability.

Order parameters: self-overlap Q, susceptibility chi and their conjugates
Qhat = 1/(1 + chi), chihat = (Q + sigma_y^2)/(1 + chi)^2. The effective
one-body problem is

    min_x  Qhat x^2 / 2 - h x + J(x),   h = sqrt(chihat) z,  z ~ N(0, 1),

with minimizer ``xstar``. Region II of the minimizer has slope
1/(Qhat - 1/(a-1)); the denominator is written with 1/(a-1) so that the
map coincides with ``penalty.f_a`` under s2 = 1/Qhat, R = h/Qhat.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import erfc

from .gaussian import symmetric_moment
from .penalty import DegenerateCurvature, ScadParams


class NoSignChange(ValueError):
    """The bracket does not straddle the stability boundary."""


@dataclass(frozen=True)
class RsSaddle:
    """RS order parameters and derived thresholds.

    ``status`` is ``"converged"``, ``"max_iter"`` or ``"curvature"`` (the
    iteration reached Qhat <= 1/(a-1), where region II has no minimizer).
    """

    Q: float
    chi: float
    Qhat: float
    chihat: float
    theta1: float
    theta2: float
    theta3: float
    status: str = "converged"
    iterations: int = 0
    residual: float = 0.0

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def thresholds(Qhat: float, chihat: float, p: ScadParams) -> tuple[float, float, float]:
    """(theta1, theta2, theta3) = lam (1, Qhat + 1, a Qhat) / sqrt(2 chihat)."""
    if chihat <= 0:
        raise ValueError("chihat must be positive")
    d = np.sqrt(2.0 * chihat)
    return p.lam / d, p.lam * (Qhat + 1.0) / d, p.a * p.lam * Qhat / d


def _curvature(Qhat: float, p: ScadParams) -> float:
    c = Qhat - 1.0 / (p.a - 1.0)
    if c <= 0:
        raise DegenerateCurvature(f"Qhat={Qhat:.6g} <= 1/(a-1)={1.0 / (p.a - 1.0):.6g}")
    return c


def xstar(z, Qhat: float, chihat: float, p: ScadParams):
    """Minimizer of the RS one-body problem at field sqrt(chihat) z."""
    c = _curvature(Qhat, p)
    z = np.asarray(z, dtype=float)
    t1, t2, t3 = (np.sqrt(2.0) * t for t in thresholds(Qhat, chihat, p))
    h = np.sqrt(chihat) * z
    s = np.sign(z)
    az = np.abs(z)
    lam, a = p.lam, p.a
    out = np.select(
        [az < t1, az < t2, az < t3],
        [0.0 * z, (h - lam * s) / Qhat, (h - a * lam / (a - 1.0) * s) / c],
        default=h / Qhat,
    )
    return out if out.ndim else float(out)


def _masses(th1, th2, th3):
    # P(|z| >= sqrt(2) theta) = erfc(theta)
    e1, e2, e3 = erfc(th1), erfc(th2), erfc(th3)
    return e1 - e2, e2 - e3, e3


def _moments(Qhat: float, chihat: float, p: ScadParams):
    """Return (E[x*^2], E[dx*/dh]) over z ~ N(0, 1)."""
    c = _curvature(Qhat, p)
    lam, a = p.lam, p.a
    th = thresholds(Qhat, chihat, p)
    u1, u2, u3 = (np.sqrt(2.0) * t for t in th)
    sq = np.sqrt(chihat)
    b = a * lam / (a - 1.0)
    x2 = symmetric_moment([u1, u2, u3], [
        (0.0, 0.0, 0.0),
        (lam**2 / Qhat**2, -2.0 * lam * sq / Qhat**2, chihat / Qhat**2),
        (b**2 / c**2, -2.0 * b * sq / c**2, chihat / c**2),
        (0.0, 0.0, chihat / Qhat**2),
    ])
    p1, p2, p3 = _masses(*th)
    dx = (p1 + p3) / Qhat + p2 / c
    return x2, dx


def _closures(Q: float, chi: float, sigma_y: float):
    Qhat = 1.0 / (1.0 + chi)
    chihat = (Q + sigma_y**2) / (1.0 + chi) ** 2
    return Qhat, chihat


def _make(Q, chi, sigma_y, p, status, it, res) -> RsSaddle:
    Qhat, chihat = _closures(Q, chi, sigma_y)
    t = thresholds(Qhat, chihat, p)
    return RsSaddle(Q=Q, chi=chi, Qhat=Qhat, chihat=chihat, theta1=t[0], theta2=t[1],
                    theta3=t[2], status=status, iterations=it, residual=res)


def rs_residuals(s: RsSaddle, alpha: float, sigma_y: float, p: ScadParams) -> np.ndarray:
    """Residuals of the four saddle-point equations at ``s``."""
    x2, dx = _moments(s.Qhat, s.chihat, p)
    return np.array([
        s.Q - x2 / alpha,
        s.chi - dx / alpha,
        s.Qhat - 1.0 / (1.0 + s.chi),
        s.chihat - (s.Q + sigma_y**2) / (1.0 + s.chi) ** 2,
    ])


def rs_saddle_solve(alpha: float, sigma_y: float, p: ScadParams, tol: float = 1e-10,
                    damping: float = 0.5, max_iter: int = 100_000,
                    init: tuple[float, float] | None = None) -> RsSaddle:
    """Solve the RS saddle point by damped iteration on (Q, chi).

    The conjugates are eliminated through their closed-form closures, so
    each sweep is Q <- E[x*^2]/alpha, chi <- E[dx*/dh]/alpha. Failures are
    reported in ``status`` rather than raised.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    Q, chi = init if init is not None else (0.0, 0.0)
    res = np.inf
    for it in range(1, max_iter + 1):
        Qhat, chihat = _closures(Q, chi, sigma_y)
        try:
            x2, dx = _moments(Qhat, chihat, p)
        except DegenerateCurvature:
            return _make(Q, chi, sigma_y, p, "curvature", it, np.inf)
        Qn, chin = x2 / alpha, dx / alpha
        res = max(abs(Qn - Q), abs(chin - chi))
        if res < tol:
            return _make(Qn, chin, sigma_y, p, "converged", it, res)
        Q = damping * Q + (1.0 - damping) * Qn
        chi = damping * chi + (1.0 - damping) * chin
    return _make(Q, chi, sigma_y, p, "max_iter", max_iter, res)


def rho(s: RsSaddle) -> float:
    """Fraction of nonzero estimates, erfc(theta1).

    erfc(t) = (2/sqrt(pi)) int_t^inf exp(-u^2) du, the standard convention.
    """
    return float(erfc(s.theta1))


class AtResult(NamedTuple):
    rs_stable: bool
    lhs: float
    gamma: float


def at_condition(s: RsSaddle, alpha: float, p: ScadParams) -> AtResult:
    """AT stability of the RS solution; unstable when lhs > 1.

    lhs = rho/alpha + [(Qhat/(Qhat - 1/(a-1)))^2 - 1] gamma/alpha with
    gamma = erfc(theta2) - erfc(theta3), the weight of region II.
    """
    c = s.Qhat - 1.0 / (p.a - 1.0)
    if c <= 0:
        return AtResult(False, np.inf, float(erfc(s.theta2) - erfc(s.theta3)))
    gamma = float(erfc(s.theta2) - erfc(s.theta3))
    lhs = rho(s) / alpha + ((s.Qhat / c) ** 2 - 1.0) * gamma / alpha
    return AtResult(bool(lhs <= 1.0), float(lhs), gamma)


def _fxi_moment(Qhat: float, chihat: float, p: ScadParams) -> float:
    # E_z of min_x (Qhat x^2/2 - h x + J(x)) in closed form per region
    c = _curvature(Qhat, p)
    lam, a = p.lam, p.a
    th = thresholds(Qhat, chihat, p)
    u = [np.sqrt(2.0) * t for t in th]
    sq = np.sqrt(chihat)
    b = a * lam / (a - 1.0)
    return symmetric_moment(u, [
        (0.0, 0.0, 0.0),
        (-lam**2 / (2 * Qhat), lam * sq / Qhat, -chihat / (2 * Qhat)),
        (-b**2 / (2 * c) - lam**2 / (2 * (a - 1.0)), b * sq / c, -chihat / (2 * c)),
        (0.5 * (a + 1.0) * lam**2, 0.0, -chihat / (2 * Qhat)),
    ])


def rs_free_energy(s: RsSaddle, alpha: float, sigma_y: float, p: ScadParams) -> float:
    """RS free energy alpha(Q+s^2)/(2(1+chi)) - alpha(Q Qhat - chi chihat)/2 + xi/2.

    This is normalized per coefficient (divide by N); the expected minimum
    of ``amp.energy_density`` (normalized per observation) is this value
    divided by ``alpha``, see ``rs_energy_density``.
    """
    xi = 2.0 * _fxi_moment(s.Qhat, s.chihat, p)
    return (alpha * (s.Q + sigma_y**2) / (2.0 * (1.0 + s.chi))
            - alpha * (s.Q * s.Qhat - s.chi * s.chihat) / 2.0 + xi / 2.0)


def rs_energy_density(s: RsSaddle, alpha: float, sigma_y: float, p: ScadParams) -> float:
    """Expected minimal energy per observation, ``rs_free_energy / alpha``."""
    return rs_free_energy(s, alpha, sigma_y, p) / alpha


def rs_penalty_density(s: RsSaddle, alpha: float, p: ScadParams) -> float:
    """(1/alpha) E_z[J(x*)], the penalty share of the energy per observation."""
    c = _curvature(s.Qhat, p)
    lam, a = p.lam, p.a
    u = [np.sqrt(2.0) * t for t in (s.theta1, s.theta2, s.theta3)]
    sq = np.sqrt(s.chihat)
    b = a * lam / (a - 1.0)
    # J on region I is lam |x|; on II it is (2 a lam |x| - x^2 - lam^2)/(2(a-1))
    k0, k1 = -b / c, sq / c
    d = 2.0 * (a - 1.0)
    j2 = (
        (2 * a * lam * k0 - k0**2 - lam**2) / d,
        (2 * a * lam * k1 - 2 * k0 * k1) / d,
        -k1**2 / d,
    )
    ej = symmetric_moment(u, [
        (0.0, 0.0, 0.0),
        (-lam**2 / s.Qhat, lam * sq / s.Qhat, 0.0),
        j2,
        (0.5 * (a + 1.0) * lam**2, 0.0, 0.0),
    ])
    return ej / alpha


def representation_error_rs(s: RsSaddle) -> float:
    """RS prediction of E||y - A x||^2 / M, which equals chihat."""
    return s.chihat


def _stable_at(alpha, sigma_y, lam, a, tol):
    p = ScadParams(lam, a)
    s = rs_saddle_solve(alpha, sigma_y, p, tol=tol)
    if s.status == "curvature":
        return False
    return at_condition(s, alpha, p).rs_stable


def phase_boundary(alpha: float, sigma_y: float, lam: float,
                   a_bracket: tuple[float, float] = (1.0 + 1e-3, 1e3),
                   tol: float = 1e-4, saddle_tol: float = 1e-12) -> float:
    """Critical a at which the AT lhs crosses 1, located by bisection.

    RS is assumed stable above the boundary (a -> inf is the convex l1
    limit). The upper end of the bracket is doubled until it is stable.

    Raises:
        NoSignChange: if no stable/unstable pair can be bracketed.
    """
    lo, hi = a_bracket
    if _stable_at(alpha, sigma_y, lam, lo, saddle_tol):
        raise NoSignChange(f"RS already stable at a={lo}")
    while not _stable_at(alpha, sigma_y, lam, hi, saddle_tol):
        lo = hi
        hi *= 2.0
        if hi > 1e9:
            raise NoSignChange("RS unstable across the whole bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _stable_at(alpha, sigma_y, lam, mid, saddle_tol):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class RatePoint(NamedTuple):
    lam: float
    rho_over_alpha: float
    err: float
    at_stable: bool
    converged: bool


def rate_distortion_curve(alpha: float, sigma_y: float, a: float, lambda_grid,
                          tol: float = 1e-12) -> list[RatePoint]:
    """(rho/alpha, chihat) along a lambda grid at fixed a.

    Points whose saddle solve fails are kept with ``converged=False`` and NaN
    values instead of aborting the curve.
    """
    grid = list(lambda_grid)
    if not grid:
        raise ValueError("lambda_grid is empty")
    out = []
    for lam in grid:
        p = ScadParams(lam, a)
        s = rs_saddle_solve(alpha, sigma_y, p, tol=tol)
        if not s.converged:
            out.append(RatePoint(lam, np.nan, np.nan, False, False))
            continue
        out.append(RatePoint(lam, rho(s) / alpha, representation_error_rs(s),
                             at_condition(s, alpha, p).rs_stable, True))
    return out
