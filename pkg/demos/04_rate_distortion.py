"""Sparsity against fitting error, SCAD versus lasso.

Sweeping lambda traces a curve of representation error against the
fraction of active coefficients. Points in the symmetry-broken phase are
marked, since the replica-symmetric prediction is not trusted there.
"""

from scadamp import rate_distortion_curve

lams = [0.8, 1.0, 1.25, 1.5, 2.0, 3.0, 5.0]
for a in (1e8, 8.0, 4.0, 3.0):
    label = "lasso" if a > 1e6 else f"a={a:g}"
    print(label)
    for pt in rate_distortion_curve(0.5, 1.0, a, lams):
        if not pt.converged:
            print(f"  lambda={pt.lam:4.2f}  (no RS saddle)")
            continue
        flag = "" if pt.at_stable else "  RSB"
        print(f"  lambda={pt.lam:4.2f}  rho/alpha={pt.rho_over_alpha:.4f}  err={pt.err:.4f}{flag}")
