"""When does coordinate descent find the same answer from every start?

For a few small column-normalized instances we look for the smallest a at
which 20 random starts all land on one solution, and set it beside the
replica boundary and the sufficient condition. Expect some spread, since
N is only 200.
"""

from scadamp import a_star, normalize_columns, phase_boundary, sample_instance, sufficient_a

N, M, lam = 200, 100, 1.0
ac = phase_boundary(M / N, 1.0, lam, tol=1e-3)
print(f"replica boundary a_c = {ac:.3f}")
for seed in range(4):
    inst, _ = normalize_columns(sample_instance(M, N, 1.0, seed))
    star = a_star(inst, lam, m=20, seed=seed + 2**32, unique_at_bottom="return")
    suff = sufficient_a(inst, lam, ac)
    print(f"instance {seed}: a* = {star:.3f}   sufficient a = {suff:.3f}")
