"""Parameter sweeps behind the command-line tool.

A sweep is split into independent *units* (one grid point each). A unit
returns a list of row dicts; the CLI persists each unit as it finishes and
assembles the CSV in canonical unit order.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import erfc

from .amp import AmpOptions, amp_local_stability, run_amp
from .coordinate_descent import a_lower_limit, a_star, sufficient_a
from .density_evolution import de_fixed_point
from .instance import normalize_columns, sample_instance
from .penalty import DegenerateCurvature, ScadParams
from .replica import (NoSignChange, at_condition, phase_boundary, rho, rs_energy_density,
                      rs_free_energy, rs_saddle_solve)

EXPERIMENTS = ("amp-sweep", "de-fixed-point", "rs-sweep", "phase-diagram",
               "rate-distortion", "cd-compare")


class ConfigError(ValueError):
    """Invalid or inconsistent sweep configuration (CLI exit code 2)."""


_TOL_DEFAULTS = {
    "amp": 1e-8,       # max-norm change between AMP iterates
    "de": 1e-12,       # |dV| + |dE| for density evolution
    "rs": 1e-12,       # saddle-point residual
    "boundary": 1e-4,  # bisection width in a for the phase boundary
    "cd": 1e-9,        # max coordinate change per CD sweep
    "d": 1e-8,         # d(y, A) below this counts as a unique fixed point
    "a_star": 1e-2,    # bisection width in a for a*
}

_DEFAULTS = {
    "amp-sweep": dict(alpha=[0.5], a_grid=[5.0],
                      lambda_grid=[1.0, 1.25, 1.5, 1.75, 2.0, 2.5], N=200, num_seeds=1000),
    "de-fixed-point": dict(alpha=[0.5], a_grid=[5.0],
                           lambda_grid=[0.8, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0]),
    "rs-sweep": dict(alpha=[0.5], a_grid=[5.0],
                     lambda_grid=[0.8, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0]),
    "phase-diagram": dict(alpha=[0.5, 0.8],
                          lambda_grid=[0.2, 0.29, 0.5, 0.614, 1.0, 1.02, 1.5, 2.0]),
    "rate-distortion": dict(alpha=[0.5], a_grid=[3.0, 6.0, 20.0, 1e8],
                            lambda_grid=[0.29, 0.4, 0.614, 0.8, 1.02, 1.5, 2.0, 3.0]),
    "cd-compare": dict(alpha=[0.1], lambda_grid=[0.6, 0.8, 1.0], N=200, num_seeds=100),
}


@dataclass(frozen=True)
class SweepConfig:
    experiment: str
    alpha: tuple = (0.5,)
    sigma_y: float = 1.0
    lambda_grid: tuple = ()
    a_grid: tuple = (5.0,)
    N: int = 200
    num_seeds: int = 100
    base_seed: int = 0
    damping: float = 0.5
    max_iter: int = 3000
    m: int = 100
    a_bracket: tuple | None = None
    normalize_columns: bool = True
    tolerances: dict = field(default_factory=dict)
    output_path: str | None = None

    def tol(self, key: str) -> float:
        return self.tolerances.get(key, _TOL_DEFAULTS[key])

    def M(self, alpha: float) -> int:
        return int(round(alpha * self.N))

    def echo(self) -> str:
        """Canonical JSON of every setting, used in the CSV header and resume checks."""
        d = asdict(self)
        d["tolerances"] = {k: self.tol(k) for k in sorted(_TOL_DEFAULTS)}
        d.pop("output_path")
        return json.dumps(d, sort_keys=True, separators=(",", ":"))


_KEYS = {f for f in SweepConfig.__dataclass_fields__}


def _floats(name, v):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        v = [v]
    if not isinstance(v, (list, tuple)):
        raise ConfigError(f"{name} must be a number or a list of numbers")
    try:
        out = tuple(float(x) for x in v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must contain numbers") from None
    if not all(math.isfinite(x) for x in out):
        raise ConfigError(f"{name} must be finite")
    return out


def _int(name, v, lo):
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise ConfigError(f"{name} must be an integer >= {lo}")
    return v


def make_config(experiment: str, raw: dict | None = None, **overrides) -> SweepConfig:
    """Merge experiment defaults, a config mapping and overrides, then validate."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    raw = dict(raw or {})
    unknown = set(raw) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if raw.pop("experiment", experiment) != experiment:
        raise ConfigError("config 'experiment' does not match the subcommand")
    d = dict(_DEFAULTS[experiment])
    d.update(raw)
    d.update({k: v for k, v in overrides.items() if v is not None})

    tols = d.get("tolerances", {}) or {}
    if not isinstance(tols, dict):
        raise ConfigError("tolerances must be a mapping")
    bad = set(tols) - set(_TOL_DEFAULTS)
    if bad:
        raise ConfigError(f"unknown tolerance keys: {', '.join(sorted(bad))}")
    for k, v in tols.items():
        if not (isinstance(v, (int, float)) and v > 0):
            raise ConfigError(f"tolerance {k} must be positive")

    alpha = _floats("alpha", d.get("alpha", (0.5,)))
    lam = _floats("lambda_grid", d.get("lambda_grid", ()))
    a_grid = _floats("a_grid", d.get("a_grid", (5.0,)))
    if not lam:
        raise ConfigError("lambda_grid is empty")
    if not a_grid and experiment not in ("phase-diagram", "cd-compare"):
        raise ConfigError("a_grid is empty")
    if not alpha:
        raise ConfigError("alpha is empty")
    if any(x <= 0 for x in lam):
        raise ConfigError("lambda values must be positive")
    if any(x <= 1 for x in a_grid):
        raise ConfigError("a values must exceed 1")
    if any(not 0 < x < 1 for x in alpha):
        raise ConfigError("alpha values must lie in (0, 1)")
    sigma_y = d.get("sigma_y", 1.0)
    if isinstance(sigma_y, bool) or not isinstance(sigma_y, (int, float)) or not sigma_y > 0:
        raise ConfigError("sigma_y must be positive")
    N = _int("N", d.get("N", 200), 2)
    for x in alpha:
        if abs(x * N - round(x * N)) > 1e-9:
            raise ConfigError(f"alpha*N must be an integer (alpha={x}, N={N})")
    damping = d.get("damping", 0.5)
    if not isinstance(damping, (int, float)) or not 0 <= damping < 1:
        raise ConfigError("damping must lie in [0, 1)")
    m = _int("m", d.get("m", 100), 0)
    if experiment == "cd-compare" and m < 2:
        raise ConfigError("m must be at least 2 (d(y, A) averages over pairs)")
    br = d.get("a_bracket")
    if br is not None:
        br = _floats("a_bracket", br)
        if len(br) != 2 or not 1 < br[0] < br[1]:
            raise ConfigError("a_bracket must be [low, high] with 1 < low < high")
    base_seed = d.get("base_seed", 0)
    if isinstance(base_seed, bool) or not isinstance(base_seed, int) or not 0 <= base_seed < 2**64:
        raise ConfigError("base_seed must be an unsigned 64-bit integer")
    norm = d.get("normalize_columns", True)
    if not isinstance(norm, bool):
        raise ConfigError("normalize_columns must be true or false")
    out = d.get("output_path")
    if out is not None and not isinstance(out, str):
        raise ConfigError("output_path must be a string")
    return SweepConfig(
        experiment=experiment, alpha=alpha, sigma_y=float(sigma_y), lambda_grid=lam,
        a_grid=a_grid, N=N, num_seeds=_int("num_seeds", d.get("num_seeds", 100), 1),
        base_seed=base_seed, damping=float(damping),
        max_iter=_int("max_iter", d.get("max_iter", 3000), 1), m=m, a_bracket=br,
        normalize_columns=norm, tolerances=dict(sorted(tols.items())), output_path=out,
    )


# ---- rows -------------------------------------------------------------------

COLUMNS = {
    "amp-sweep": ["row_type", "alpha", "lambda", "a", "seed", "status", "converged",
                  "iterations", "sparsity_ratio", "rep_error", "energy", "n_converged",
                  "n_total", "sparsity_se", "rep_error_se", "energy_se", "rs_sparsity",
                  "rs_at_stable"],
    "de-fixed-point": ["alpha", "lambda", "a", "converged", "iterations", "V", "E",
                       "rho_over_alpha", "stability_lhs", "stable"],
    "rs-sweep": ["alpha", "lambda", "a", "status", "iterations", "Q", "chi", "Qhat", "chihat",
                 "rho_over_alpha", "at_lhs", "rs_stable", "free_energy", "energy_density"],
    "phase-diagram": ["alpha", "lambda", "a_critical", "status", "phase_at_a_3_7"],
    "rate-distortion": ["alpha", "a", "lambda", "converged", "rho_over_alpha", "err",
                        "at_stable"],
    "cd-compare": ["row_type", "alpha", "lambda", "seed", "status", "a_star", "a_sufficient",
                   "a_star_mean", "a_star_se", "a_sufficient_mean", "a_sufficient_se",
                   "a_replica_boundary", "n_used", "n_failed"],
}


def units(cfg: SweepConfig) -> list[tuple]:
    """Grid points in canonical order."""
    e = cfg.experiment
    if e in ("amp-sweep", "de-fixed-point", "rs-sweep"):
        return [(al, lam, a) for al in cfg.alpha for lam in cfg.lambda_grid for a in cfg.a_grid]
    if e == "rate-distortion":
        return [(al, a, lam) for al in cfg.alpha for a in cfg.a_grid for lam in cfg.lambda_grid]
    return [(al, lam) for al in cfg.alpha for lam in cfg.lambda_grid]


def mean_se(values) -> tuple[float, float]:
    """Sample mean and standard error (ddof=1); NaN where undefined."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return math.nan, math.nan
    mean = float(np.mean(v))
    se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.nan
    return mean, se


def _amp_unit(cfg: SweepConfig, alpha, lam, a):
    p = ScadParams(lam, a)
    M = cfg.M(alpha)
    opts = AmpOptions(damping=cfg.damping, tol=cfg.tol("amp"), max_iter=cfg.max_iter)
    rows = []
    good = []
    for k in range(cfg.num_seeds):
        seed = cfg.base_seed + k
        res = run_amp(sample_instance(M, cfg.N, cfg.sigma_y, seed), p, opts)
        rows.append(dict(row_type="seed", alpha=alpha, **{"lambda": lam}, a=a, seed=seed,
                         status=res.status, converged=res.converged, iterations=res.iterations,
                         sparsity_ratio=res.sparsity_ratio, rep_error=res.rep_error,
                         energy=res.energy))
        if res.converged:
            good.append((res.sparsity_ratio, res.rep_error, res.energy))
    g = np.array(good, dtype=float).reshape(-1, 3)
    (sp, sp_se), (re, re_se), (en, en_se) = (mean_se(g[:, i]) for i in range(3))
    s = rs_saddle_solve(alpha, cfg.sigma_y, p, tol=cfg.tol("rs"))
    rs_sp = rho(s) / alpha if s.converged else math.nan
    rs_st = at_condition(s, alpha, p).rs_stable if s.converged else None
    rows.append(dict(row_type="aggregate", alpha=alpha, **{"lambda": lam}, a=a,
                     sparsity_ratio=sp, rep_error=re, energy=en, n_converged=len(good),
                     n_total=cfg.num_seeds, sparsity_se=sp_se, rep_error_se=re_se,
                     energy_se=en_se, rs_sparsity=rs_sp, rs_at_stable=rs_st))
    return rows


def _de_unit(cfg: SweepConfig, alpha, lam, a):
    p = ScadParams(lam, a)
    res = de_fixed_point(alpha, cfg.sigma_y, p, tol=cfg.tol("de"))
    V, E = res.state.V, res.state.E
    row = dict(alpha=alpha, **{"lambda": lam}, a=a, converged=res.converged,
               iterations=len(res.trajectory) - 1, V=V, E=E)
    if res.converged:
        row["rho_over_alpha"] = float(erfc(lam * (1.0 + V) / math.sqrt(2.0 * E))) / alpha
        try:
            st = amp_local_stability(V, E, alpha, p)
            row.update(stability_lhs=st.lhs, stable=st.stable)
        except DegenerateCurvature:
            row.update(stable=False)
    return [row]


def _rs_unit(cfg: SweepConfig, alpha, lam, a):
    p = ScadParams(lam, a)
    s = rs_saddle_solve(alpha, cfg.sigma_y, p, tol=cfg.tol("rs"))
    row = dict(alpha=alpha, **{"lambda": lam}, a=a, status=s.status, iterations=s.iterations)
    if s.converged:
        at = at_condition(s, alpha, p)
        row.update(Q=s.Q, chi=s.chi, Qhat=s.Qhat, chihat=s.chihat,
                   rho_over_alpha=rho(s) / alpha, at_lhs=at.lhs, rs_stable=at.rs_stable,
                   free_energy=rs_free_energy(s, alpha, cfg.sigma_y, p),
                   energy_density=rs_energy_density(s, alpha, cfg.sigma_y, p))
    return [row]


def _boundary(cfg: SweepConfig, alpha, lam, bracket=None):
    kw = {} if bracket is None else {"a_bracket": bracket}
    try:
        return phase_boundary(alpha, cfg.sigma_y, lam, tol=cfg.tol("boundary"), **kw), "ok"
    except NoSignChange:
        return math.nan, "unresolved"


def _phase_unit(cfg: SweepConfig, alpha, lam):
    ac, status = _boundary(cfg, alpha, lam, cfg.a_bracket)
    p = ScadParams(lam, 3.7)
    s = rs_saddle_solve(alpha, cfg.sigma_y, p, tol=cfg.tol("rs"))
    stable = s.converged and at_condition(s, alpha, p).rs_stable
    return [dict(alpha=alpha, **{"lambda": lam}, a_critical=ac, status=status,
                 phase_at_a_3_7="RS" if stable else "RSB")]


def _rate_unit(cfg: SweepConfig, alpha, a, lam):
    p = ScadParams(lam, a)
    s = rs_saddle_solve(alpha, cfg.sigma_y, p, tol=cfg.tol("rs"))
    row = dict(alpha=alpha, a=a, **{"lambda": lam}, converged=s.converged)
    if s.converged:
        row.update(rho_over_alpha=rho(s) / alpha, err=s.chihat,
                   at_stable=at_condition(s, alpha, p).rs_stable)
    return [row]


def _cd_unit(cfg: SweepConfig, alpha, lam):
    M = cfg.M(alpha)
    ac, _ = _boundary(cfg, alpha, lam)
    rows = []
    stars, suffs = [], []
    for k in range(cfg.num_seeds):
        seed = cfg.base_seed + k
        inst = sample_instance(M, cfg.N, cfg.sigma_y, seed)
        if cfg.normalize_columns:
            inst, _ = normalize_columns(inst)
        floor = a_lower_limit(inst) + 1e-6
        lo, hi = cfg.a_bracket if cfg.a_bracket is not None else (floor, 100.0)
        lo = max(lo, floor)
        row = dict(row_type="instance", alpha=alpha, **{"lambda": lam}, seed=seed)
        try:
            # multi-start draws use a stream disjoint from the instance seeds
            val = a_star(inst, lam, (lo, hi), m=cfg.m, seed=seed + 2**32,
                         d_tol=cfg.tol("d"), a_tol=cfg.tol("a_star"), cd_tol=cfg.tol("cd"),
                         unique_at_bottom="return")
            row.update(status="bottom" if val == lo else "ok", a_star=val)
            stars.append(val)
        except NoSignChange:
            row.update(status="no_sign_change")
        except DegenerateCurvature:
            row.update(status="curvature")
        a0 = ac if math.isfinite(ac) else 3.7
        suff = sufficient_a(inst, lam, max(a0, floor), tol=cfg.tol("cd"))
        row["a_sufficient"] = suff
        if math.isfinite(suff):
            suffs.append(suff)
        rows.append(row)
    sm, sse = mean_se(stars)
    fm, fse = mean_se(suffs)
    rows.append(dict(row_type="aggregate", alpha=alpha, **{"lambda": lam}, a_star_mean=sm,
                     a_star_se=sse, a_sufficient_mean=fm, a_sufficient_se=fse,
                     a_replica_boundary=ac, n_used=len(stars),
                     n_failed=cfg.num_seeds - len(stars)))
    return rows


_RUNNERS = {
    "amp-sweep": _amp_unit,
    "de-fixed-point": _de_unit,
    "rs-sweep": _rs_unit,
    "phase-diagram": _phase_unit,
    "rate-distortion": _rate_unit,
    "cd-compare": _cd_unit,
}


def run_unit(cfg: SweepConfig, unit: tuple) -> list[dict]:
    return _RUNNERS[cfg.experiment](cfg, *unit)


def run_sweep(cfg: SweepConfig) -> list[dict]:
    """All rows of a sweep, computed serially in canonical order."""
    rows = []
    for u in units(cfg):
        rows.extend(run_unit(cfg, u))
    return rows


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render_csv(cfg: SweepConfig, rows: list[dict], version: str) -> str:
    cols = COLUMNS[cfg.experiment]
    lines = [f"# scadamp {version}", f"# experiment: {cfg.experiment}",
             f"# config: {cfg.echo()}", ",".join(cols)]
    for r in rows:
        lines.append(",".join(format_value(r.get(c)) for c in cols))
    return "\n".join(lines) + "\n"
