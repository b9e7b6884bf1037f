"""One AMP run next to the large-system theory.

We draw a random overcomplete design, run SCAD-AMP and compare its
sparsity and residual with the density-evolution fixed point and the
replica-symmetric saddle. At this size the theory should agree to a few
percent.
"""

import math

from scadamp import (ScadParams, at_condition, de_fixed_point, rho, rs_saddle_solve, run_amp,
                     sample_instance)

alpha, N = 0.5, 2000
p = ScadParams(lam=1.5, a=5.0)
inst = sample_instance(int(alpha * N), N, sigma_y=1.0, seed=7)

res = run_amp(inst, p)
de = de_fixed_point(alpha, 1.0, p)
rs = rs_saddle_solve(alpha, 1.0, p)

print(f"AMP converged={res.converged} after {res.iterations} iterations")
print(f"sparsity rho/alpha: AMP {res.sparsity_ratio:.4f}  replica {rho(rs) / alpha:.4f}")
print(f"residual |y-Ax|^2/M: AMP {res.rep_error:.4f}  replica chihat {rs.chihat:.4f}")
print(f"V: AMP {res.final_V:.4f}  DE {de.state.V:.4f}  replica chi {rs.chi:.4f}")
at = at_condition(rs, alpha, p)
print(f"AT lhs {at.lhs:.4f} -> {'replica symmetric' if at.rs_stable else 'symmetry broken'}")
print(f"(finite-size scale 1/sqrt(N) = {1 / math.sqrt(N):.3f})")
