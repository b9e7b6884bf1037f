import numpy as np
import pytest

from oracles import de_step_quad, gauss_quad
from scadamp.density_evolution import MacroState, de_fixed_point, de_step, prox_moments
from scadamp.gaussian import gaussian_piecewise_moment, symmetric_moment
from scadamp.penalty import DegenerateCurvature, ScadParams, f_a, f_c
from scadamp.replica import rs_saddle_solve


def test_moment_normalization():
    assert gaussian_piecewise_moment([], [(1.0, 0.0, 0.0)]) == pytest.approx(1.0, abs=1e-15)
    assert gaussian_piecewise_moment([], [(0.0, 0.0, 1.0)]) == pytest.approx(1.0, abs=1e-15)
    assert gaussian_piecewise_moment([-1.0, 2.0], [(0, 0, 1)] * 3) == pytest.approx(1.0)


def test_piecewise_moment_vs_quadrature():
    rng = np.random.default_rng(0)
    for _ in range(20):
        t = np.sort(rng.uniform(-4, 4, 3))
        polys = [tuple(rng.normal(size=3)) for _ in range(4)]

        def g(z):
            k = np.searchsorted(t, z)
            c0, c1, c2 = polys[k]
            return c0 + c1 * z + c2 * z * z

        assert gaussian_piecewise_moment(t, polys) == pytest.approx(gauss_quad(g, t), abs=1e-10)


def test_symmetric_moment_doubles_half_line():
    # even g = |z| on the whole line has mean sqrt(2/pi)
    assert symmetric_moment([], [(0.0, 1.0, 0.0)]) == pytest.approx(np.sqrt(2 / np.pi))


def test_zero_E():
    p = ScadParams(1.0, 5.0)
    s = de_step(MacroState(0.3, 0.0), 0.5, 1.3, p)
    assert s.V == 0.0 and s.E == pytest.approx(1.69)


def test_huge_lambda_fixed_point():
    res = de_fixed_point(0.5, 1.0, ScadParams(1e3, 5.0))
    assert res.converged
    assert res.state == MacroState(0.0, 1.0)
    assert len(res.trajectory) == 2


def test_curvature_error_and_flag():
    p = ScadParams(0.3, 2.2)
    with pytest.raises(DegenerateCurvature):
        de_step(MacroState(1.5, 1.0), 0.5, 1.0, p)
    assert not de_fixed_point(0.1, 1.0, ScadParams(0.1, 2.05)).converged


def test_rejects_bad_tol():
    with pytest.raises(ValueError):
        de_fixed_point(0.5, 1.0, ScadParams(1, 5), tol=0)


def test_step_vs_monte_carlo():
    p = ScadParams(1.0, 5.0)
    s = de_step(MacroState(0.0, 1.0), 0.5, 1.0, p)
    z = np.random.default_rng(42).standard_normal(10_000_000)
    fa = f_a(1.0, z, p)
    fc = f_c(1.0, z, p)
    n = z.size
    V_mc, V_se = fc.mean() / 0.5, fc.std() / np.sqrt(n) / 0.5
    E_mc, E_se = (fa**2).mean() / 0.5 + 1.0, (fa**2).std() / np.sqrt(n) / 0.5
    assert abs(s.V - V_mc) < 3 * V_se
    assert abs(s.E - E_mc) < 3 * E_se


@pytest.mark.parametrize("seed", range(8))
def test_step_vs_quadrature(seed):
    rng = np.random.default_rng(seed)
    lam, a = rng.uniform(0.2, 2.5), rng.uniform(3, 15)
    V = rng.uniform(0, 0.9) * (a - 2)
    E, alpha, sy = rng.uniform(0.2, 4), rng.uniform(0.1, 0.9), rng.uniform(0.3, 2)
    s = de_step(MacroState(V, E), alpha, sy, ScadParams(lam, a))
    Vq, Eq = de_step_quad(V, E, alpha, sy, lam, a)
    assert s.V == pytest.approx(Vq, abs=1e-9)
    assert s.E == pytest.approx(Eq, abs=1e-9)


def test_fixed_point_is_consistent_and_above_noise():
    p = ScadParams(1.2, 6.0)
    res = de_fixed_point(0.5, 1.0, p)
    assert res.converged
    assert res.trajectory[0] == MacroState(0.0, 1.0)
    nxt = de_step(res.state, 0.5, 1.0, p)
    assert abs(nxt.V - res.state.V) + abs(nxt.E - res.state.E) < 1e-10
    assert res.state.E >= 1.0


def test_matches_replica_saddle():
    p = ScadParams(1.0, 5.0)
    de = de_fixed_point(0.5, 1.0, p).state
    rs = rs_saddle_solve(0.5, 1.0, p, tol=1e-13)
    assert abs(de.V - rs.chi) + abs(de.E - (rs.Q + 1.0)) < 1e-9


def test_unique_from_random_starts():
    p = ScadParams(1.0, 5.0)
    ref = de_fixed_point(0.5, 1.0, p).state
    rng = np.random.default_rng(1)
    for _ in range(5):
        init = MacroState(rng.uniform(0, 1.5), rng.uniform(1, 4))
        s = de_fixed_point(0.5, 1.0, p, init=init, damping=0.3).state
        assert abs(s.V - ref.V) + abs(s.E - ref.E) < 1e-9


def test_prox_moments_zero_E():
    assert prox_moments(1.0, 0.0, ScadParams(1, 5)) == (0.0, 0.0)
