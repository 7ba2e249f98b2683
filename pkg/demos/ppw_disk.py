"""The universal recursion on a flat disk.

With no weight and p = 0, the recursion at k = 1 and α = 2 reads λ₂ ≤ 3λ₁ in
two dimensions. The Dirichlet disk has λ₂/λ₁ = (j₁₁/j₀₁)² ≈ 2.539, safely
inside the bound but not far from it. This script solves the disk, prints the
ratio and then walks the recursion through k and α to show how much room each
instance leaves.
"""

from weightedhodge import make_disk, make_setting
from weightedhodge.inequalities import cor13_recursion, yang_recursion

J01, J11 = 2.404825557695773, 3.831705970207512

for level in (3, 4, 5):
    s = make_setting(make_disk(1.0, level))
    l1, l2 = s.eigenvalues(0, 2)
    print(f"level {level}: λ1 = {l1:.4f} (exact {J01 ** 2:.4f}), λ2/λ1 = {l2 / l1:.4f} "
          f"(exact {(J11 / J01) ** 2:.4f})")

s = make_setting(make_disk(1.0, 5))
r = yang_recursion(s, 0, 1, 2.0)
lam = r.details["eigenvalues"]
print(f"\nk=1, α=2: λ2 = {lam[1]:.4f} <= 3 λ1 = {3 * lam[0]:.4f}  ({r.status})")

# the report compares Σ_i (λ_(k+1) − λ_i)^α with the bracketed right-hand side
print("\n  k   α    λ_(k+1)   Σ(λ_(k+1)−λ_i)^α      bound     slack")
for alpha in (1.5, 2.0, 3.0):
    for k in (1, 2, 3, 4, 5):
        r = yang_recursion(s, 0, k, alpha)
        print(f"  {k}  {alpha:3.1f}  {r.details['eigenvalues'][k]:8.4f}  {r.left:16.4f}  {r.right:9.4f}  {r.slack:8.4f}")

# flat and unweighted: both correction terms vanish and the δ-form coincides
r2 = cor13_recursion(s, 0, 1, 2.0)
print(f"\nδ-form at k=1, α=2: bound {r2.right:.4f}, δ1 = {r2.details['delta1']:.3g}, δ2 = {r2.details['delta2']:.3g}")
