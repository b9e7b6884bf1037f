"""SCAD-AMP: approximate message passing for SCAD-penalized least squares.

Each iteration, for an M x N design with i.i.d. N(0, 1/M) entries:

    V     <- sum(nu) / M
    omega <- A a - V/(V+1) (y - omega)        # Onsager-corrected residual
    R     <- a + A^T (y - omega)
    a     <- f_a(1 + V, R),  nu <- f_c(1 + V, R)

At a fixed point y - omega = (1 + V)(y - A a), so ``a`` is a stationary
point of (1/2)||y - A x||^2 + J(x).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import erfc

from .instance import Instance
from .penalty import DegenerateCurvature, ScadParams, prox_pair, region_II_gain, vector_penalty

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AmpState:
    a_vec: np.ndarray
    nu_vec: np.ndarray
    omega: np.ndarray
    V: float
    t: int = 0
    # undamped prox output of the last step; exact zeros survive here
    prox_a: np.ndarray | None = None

    @classmethod
    def cold(cls, inst: Instance) -> "AmpState":
        """a = 0, nu = 0, omega = y, so the first R is the matched filter A^T y."""
        return cls(np.zeros(inst.N), np.zeros(inst.N), inst.y.copy(), 0.0, 0)


@dataclass(frozen=True)
class AmpOptions:
    damping: float = 0.5
    tol: float = 1e-8
    max_iter: int = 20_000
    init: AmpState | None = None
    trace: bool = False

    def __post_init__(self):
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class AmpResult:
    estimate: np.ndarray
    converged: bool
    iterations: int
    energy: float
    sparsity_ratio: float
    rep_error: float
    final_V: float
    status: str = "converged"
    state: AmpState | None = None
    history: list = field(default_factory=list)


def amp_step(state: AmpState, inst: Instance, p: ScadParams,
             opts: AmpOptions = AmpOptions()) -> AmpState:
    """One SCAD-AMP iteration; damping mixes the new a and nu with the old."""
    A, y = inst.A, inst.y
    if state.a_vec.shape != (inst.N,) or state.omega.shape != (inst.M,):
        raise ValueError("state dimensions do not match the instance")
    V = state.nu_vec.sum() / inst.M
    omega = A @ state.a_vec - (V / (V + 1.0)) * (y - state.omega)
    R = state.a_vec + A.T @ (y - omega)
    s2 = 1.0 + V
    a_new, nu_new = prox_pair(s2, R, p)
    prox_a = a_new
    d = opts.damping
    if d:
        a_new = (1.0 - d) * a_new + d * state.a_vec
        nu_new = (1.0 - d) * nu_new + d * state.nu_vec
    return AmpState(a_new, nu_new, omega, nu_new.sum() / inst.M, state.t + 1, prox_a)


def energy_density(x, inst: Instance, p: ScadParams) -> float:
    """(1/M) [ ||y - A x||^2 / 2 + sum_i J(x_i) ]."""
    r = inst.y - inst.A @ x
    return (0.5 * float(r @ r) + vector_penalty(x, p)) / inst.M


def sparsity_ratio(x, M: int) -> float:
    """Number of exactly nonzero entries divided by M."""
    return np.count_nonzero(np.asarray(x)) / M


def empirical_rep_error(x, inst: Instance) -> float:
    r = inst.y - inst.A @ x
    return float(r @ r) / inst.M


def run_amp(inst: Instance, p: ScadParams, opts: AmpOptions = AmpOptions()) -> AmpResult:
    """Iterate ``amp_step`` until max|a_t - a_{t-1}| < tol or max_iter.

    Non-convergence is reported via ``converged=False`` with a ``status`` of
    ``"max_iter"``, ``"curvature"`` (1 + V reached a - 1) or ``"diverged"``.
    """
    state = opts.init if opts.init is not None else AmpState.cold(inst)
    status = "max_iter"
    history = []
    it = 0
    for it in range(1, opts.max_iter + 1):
        try:
            new = amp_step(state, inst, p, opts)
        except DegenerateCurvature:
            status = "curvature"
            break
        if not np.all(np.isfinite(new.a_vec)):
            status = "diverged"
            break
        if opts.trace:
            history.append((new.V, float(new.a_vec @ new.a_vec) / inst.M))
        delta = np.max(np.abs(new.a_vec - state.a_vec))
        state = new
        if delta < opts.tol:
            status = "converged"
            break
    # damping only shrinks thresholded entries geometrically; report the prox
    x = state.prox_a if state.prox_a is not None else state.a_vec
    if status != "converged":
        log.debug("AMP stopped with status %s after %d iterations", status, it)
    return AmpResult(
        estimate=x,
        converged=status == "converged",
        iterations=it,
        energy=energy_density(x, inst, p),
        sparsity_ratio=sparsity_ratio(x, inst.M),
        rep_error=empirical_rep_error(x, inst),
        final_V=state.V,
        status=status,
        state=state,
        history=history,
    )


class StabilityResult(NamedTuple):
    stable: bool
    lhs: float


def amp_local_stability(V: float, E: float, alpha: float, p: ScadParams) -> StabilityResult:
    """Local stability of an AMP fixed point described by (V, E).

    lhs = (1/alpha) E_z[(d f_a / dR)^2] at R = z sqrt(E), s2 = 1 + V; the
    fixed point is unstable when lhs > 1. The slope is 1 on regions I and
    III and ``1/(1 - s2/(a-1))`` on region II, so the expectation is a sum
    of erfc terms.
    """
    if V < 0 or E < 0 or alpha <= 0:
        raise ValueError("need V >= 0, E >= 0, alpha > 0")
    s2 = 1.0 + V
    if s2 >= p.a - 1.0:
        raise DegenerateCurvature(f"1+V={s2:.6g} >= a-1={p.a - 1.0:.6g}")
    if E == 0:
        return StabilityResult(True, 0.0)
    d = np.sqrt(2.0 * E)
    # P(|R| > c) = erfc(c / sqrt(2E))
    e1 = erfc(p.lam * s2 / d)
    e2 = erfc(p.lam * (1.0 + s2) / d)
    e3 = erfc(p.a * p.lam / d)
    g = region_II_gain(s2, p)
    lhs = ((e1 - e2) + e3 + g * g * (e2 - e3)) / alpha
    return StabilityResult(bool(lhs <= 1.0), float(lhs))
