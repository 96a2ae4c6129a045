"""Compressed convolution norms on Cayley balls.

For the infinite dihedral group the probe delta_s + delta_t has norm 2 in the
limit; for the free product of three copies of Z/2 the sum of generators has
norm 2 sqrt(2).  The block tables stay bounded, so the polynomial fit has
degree zero.  Pass ``--pentagon`` to add the right-angled Coxeter group of the
pentagon (about a minute).
"""

import math
import sys

from graphprod.rd import preset, run_experiment

names = ["dinfty", "z2free3", "clique", "free"] + (["pentagon"] if "--pentagon" in sys.argv else [])
for name in names:
    p = preset(name)
    exp = run_experiment(p, trials=32)
    worst = max(exp.rows, key=lambda e: e.estimate)
    print(f"{name:>9}  R={p.radius:>2}  growth {exp.growth.model:<11} shells {exp.growth.sizes[:6]}")
    print(f"{'':>9}  largest block ({worst.k},{worst.l},{worst.m}) = {worst.estimate:.4f}; "
          f"fit {exp.fit.constant:.3f}*(k+1)^{exp.fit.degree}")
    print(f"{'':>9}  full norm of the probe {exp.full:.6f}  (l1 norm {exp.full_chain:.1f})")
    print(f"{'':>9}  {p.clique_hypothesis()}")
print(f"\nreference values: 2 and 2*sqrt(2) = {2 * math.sqrt(2):.6f}")
