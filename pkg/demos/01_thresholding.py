"""How SCAD shrinks a single noisy coefficient.

The one-dimensional problem min_x J(x) + (x - R)^2 / (2 s2) has a closed-form
answer. Small inputs are zeroed, moderate ones are soft-thresholded, and
large ones pass through untouched. Between the last two the rule blends
linearly. That blend is what separates SCAD from the lasso.
"""

import numpy as np

from scadamp import ScadParams, classify_region, f_a, f_c, single_body_oracle, soft_threshold

p = ScadParams(lam=1.0, a=3.7)
s2 = 1.0
R = np.array([0.5, 1.5, 2.5, 3.0, 3.5, 5.0])

print(f"lambda={p.lam}, a={p.a}, sigma^2={s2}")
print(f"{'R':>5} {'region':>7} {'scad':>8} {'lasso':>8} {'brute':>8} {'slope':>6}")
for r in R:
    region = classify_region(s2, r, p).name
    print(f"{r:5.2f} {region:>7} {f_a(s2, r, p):8.4f} {soft_threshold(r, p.lam * s2):8.4f} "
          f"{single_body_oracle(s2, r, p):8.4f} {f_c(s2, r, p):6.3f}")

print("\nAbove a*lambda SCAD leaves the input unbiased. The lasso keeps shrinking it by lambda.")
