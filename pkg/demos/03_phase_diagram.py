"""Where replica symmetry breaks.

For each lambda we bisect on a for the point where the AT condition
crosses one. Below that a, the energy landscape fragments and AMP loses
stability. Smaller lambda needs a larger a to stay in the safe phase.
"""

from scadamp import phase_boundary

for alpha in (0.5, 0.8):
    print(f"alpha = {alpha}")
    for lam in (0.2, 0.3, 0.5, 0.8, 1.0, 1.5, 2.0):
        ac = phase_boundary(alpha, 1.0, lam, tol=1e-4)
        mark = "RS" if 3.7 > ac else "RSB"
        print(f"  lambda={lam:4.2f}  a_c={ac:8.3f}   conventional a=3.7 is {mark}")
