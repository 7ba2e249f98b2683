"""Index of the round self-shrinker.

The sphere of radius √2 is f-minimal for f = |X|²/2: the weighted mean
curvature nH − ⟨X, ν⟩ vanishes. Its Jacobi operator is Δ − 2, because the
Hessian of f is the identity and |II|² = 1. Eigenvalues of Δ are
l(l+1)/2, so the Jacobi spectrum starts −2, −1 (×3), 1 (×5) and the index is 4.
The comparison with 1-form eigenvalues bounds each Jacobi eigenvalue from above,
and the Betti count gives the lower bound 3 for the index.
"""

import numpy as np

from weightedhodge import estimate_curvature, make_setting, make_sphere
from weightedhodge.inequalities import jacobi
from weightedhodge.weights import radial_weight

m = make_sphere(np.sqrt(2.0), 4)
c = estimate_curvature(m)
s = make_setting(m, radial_weight(m, c, 1.0), curv=c)

J, summary, reports = jacobi(s, p=1, L=3)
print(f"sup |H_f| = {summary['fmin_residual_sup']:.4f} (f-minimal: {summary['f_minimal']})")
print("Jacobi eigenvalues:", np.round(summary["jacobi_eigenvalues"][:9], 4))
print(f"index = {summary['index']}, γ_M = {summary['gamma_M']:.4f}, a = {summary['a']:g}")

print("\n  l  d(l)  λ_l(L_f)   bound")
for r in reports:
    if r.theorem == "thm1.5":
        print(f"  {r.inputs['l']}  {r.inputs['d(l)']:4d}  {r.left:8.4f}  {r.right:8.4f}  {r.status}")

for r in reports:
    if r.theorem != "thm1.5":
        print(f"{r.theorem}: index {r.left:g} >= {r.right:g}  {r.status}")
