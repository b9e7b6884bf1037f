"""Closed-form Gaussian expectations of piecewise-quadratic functions."""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _pdf(z):
    z = np.asarray(z, dtype=float)
    with np.errstate(over="ignore"):
        return np.where(np.isinf(z), 0.0, _INV_SQRT_2PI * np.exp(-0.5 * z * z))


def _zpdf(z):
    z = np.asarray(z, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.where(np.isinf(z), 0.0, z * _INV_SQRT_2PI * np.exp(-0.5 * z * z))


def _mass(lo, hi):
    # Phi(hi) - Phi(lo), evaluated in whichever tail keeps precision
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    upper = ndtr(-lo) - ndtr(-hi)
    lower = ndtr(hi) - ndtr(lo)
    return np.where(lo >= 0.0, upper, lower)


def partial_moments(lo, hi):
    """Return (m0, m1, m2) with m_k = int_lo^hi z^k phi(z) dz."""
    m0 = _mass(lo, hi)
    m1 = _pdf(lo) - _pdf(hi)
    m2 = m0 + _zpdf(lo) - _zpdf(hi)
    return m0, m1, m2


def gaussian_piecewise_moment(thresholds, polys) -> float:
    """E[g(z)] for z ~ N(0, 1) and piecewise-quadratic g.

    Args:
        thresholds: sorted breakpoints t_1 <= ... <= t_K.
        polys: K + 1 coefficient triples (c0, c1, c2); triple k describes
            g(z) = c0 + c1 z + c2 z^2 on the k-th interval of
            (-inf, t_1], [t_1, t_2], ..., [t_K, inf).
    """
    t = np.asarray(thresholds, dtype=float).ravel()
    c = np.asarray(polys, dtype=float).reshape(-1, 3)
    if c.shape[0] != t.size + 1:
        raise ValueError("need exactly one polynomial per interval")
    if t.size and np.any(np.diff(t) < 0):
        raise ValueError("thresholds must be sorted")
    edges = np.concatenate([[-np.inf], t, [np.inf]])
    m0, m1, m2 = partial_moments(edges[:-1], edges[1:])
    return float(np.sum(c[:, 0] * m0 + c[:, 1] * m1 + c[:, 2] * m2))


def symmetric_moment(thresholds, polys) -> float:
    """E[g(z)] for an even g specified on z >= 0 only.

    ``thresholds`` are the positive breakpoints and ``polys`` the K + 1
    triples on [0, t_1], ..., [t_K, inf).
    """
    t = np.asarray(thresholds, dtype=float).ravel()
    c = np.asarray(polys, dtype=float).reshape(-1, 3)
    if c.shape[0] != t.size + 1:
        raise ValueError("need exactly one polynomial per interval")
    edges = np.concatenate([[0.0], t, [np.inf]])
    m0, m1, m2 = partial_moments(edges[:-1], edges[1:])
    return float(2.0 * np.sum(c[:, 0] * m0 + c[:, 1] * m1 + c[:, 2] * m2))
