"""SCAD-penalized regression: AMP, density evolution, replica analysis and coordinate descent."""

from .amp import (AmpOptions, AmpResult, AmpState, amp_local_stability, amp_step,
                  empirical_rep_error, energy_density, run_amp, sparsity_ratio)
from .coordinate_descent import (CdState, a_star, cd_coordinate_update, cd_sweep,
                                 multistart_divergence, run_cd, sufficient_a,
                                 sufficient_condition)
from .density_evolution import MacroState, de_fixed_point, de_step
from .gaussian import gaussian_piecewise_moment
from .instance import (Instance, center_instance, load_instance, normalize_columns,
                       sample_instance, save_instance)
from .penalty import (DegenerateCurvature, Region, ScadParams, classify_region, f_a, f_c,
                      penalty, single_body_oracle, soft_threshold, vector_penalty)
from .replica import (NoSignChange, RsSaddle, at_condition, phase_boundary,
                      rate_distortion_curve, representation_error_rs, rho,
                      rs_energy_density, rs_free_energy, rs_saddle_solve, thresholds, xstar)

__version__ = "0.1.0"
