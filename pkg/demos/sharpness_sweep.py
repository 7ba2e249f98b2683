"""How close the closed-surface bounds get on the sphere, as the mesh is refined.

On the unit sphere, 1-forms and functions share their first positive eigenvalue
2. The spectral gap bound between the two degrees and the upper bound for the
first exact eigenvalue are both equalities there. The discrete slack shrinks
by a factor of three to four per refinement level, close to the second-order
rate of the circumcentric discretization.
"""

from weightedhodge import make_setting, make_sphere
from weightedhodge.inequalities import thm11_gap, thm11_upper

print("level  vertices   gap slack   upper slack")
prev = None
for level in (2, 3, 4, 5):
    s = make_setting(make_sphere(1.0, level))
    g, u = thm11_gap(s, 1), thm11_upper(s, 1)
    line = f"{level:5d}  {s.mesh.n_vertices:8d}   {g.slack:9.5f}   {u.slack:11.5f}"
    if prev is not None:
        line += f"   ratios {prev[0] / g.slack:.2f}, {prev[1] / u.slack:.2f}"
    print(line)
    prev = (g.slack, u.slack)
