"""Modular theory of the vacuum state and amalgamated freeness on the pentagon.

With a non-tracial density at the odd vertices the modular operator is
nontrivial.  Its spectrum is built from the vertex ratios, S = J Delta^(1/2)
sends a Omega to a* Omega, and the modular flow acts letter by letter.  The
expectation onto Link(1) kills alternating products of centered pieces.
"""

import numpy as np

from graphprod import pentagon
from graphprod.expectations import (
    commutation_suite,
    freeness_check,
    modular_data,
    random_letters,
    sigma_t,
)
from graphprod.fock import FockSpace, apply_letters, reduced_operator
from graphprod.vertex import GroupAlgebra, MatrixAlgebra
from graphprod.words import FiniteGroup

g = pentagon()
rho = MatrixAlgebra(np.diag([2 / 3, 1 / 3]))
z2 = GroupAlgebra(FiniteGroup.cyclic(2))
space = FockSpace(g, {v: (rho if v % 2 else z2) for v in g.vertices}, 3)
md = modular_data(space)
print("distinct modular eigenvalues:", np.unique(np.round(md.spectrum(), 10)))

rng = np.random.default_rng(1)
letters = random_letters(space, (1, 2, 3), rng)
adj = [(v, space.algebras[v].adjoint(x)) for v, x in reversed(letters)]
res = np.linalg.norm(md.apply_S(apply_letters(space, letters, space.vacuum()))
                     - apply_letters(space, adj, space.vacuum()))
print(f"|S a Omega - a* Omega| = {res:.1e}")
for t in (0.3, 1.0, -2.0):
    diff = md.flow(t, reduced_operator(space, letters)) - sigma_t(space, t, letters)
    print(f"t = {t:+.1f}: letterwise flow vs Delta^it conjugation {diff.safe_norm():.1e}")

rows = commutation_suite(space, instances=40, seed=0)
for kind in ("edge", "left_right", "conjugation"):
    print(f"{kind:>12}: max residual {max(r.residual for r in rows if r.kind == kind):.1e}")

space4 = FockSpace(g, space.algebras, 4)
rep = freeness_check(space4, 1, instances=100, seed=0)
print(f"\nfreeness over Link(1): {len(rep.rows)} alternating products, max |E(a1...an)| = {rep.max_residual:.1e}")
