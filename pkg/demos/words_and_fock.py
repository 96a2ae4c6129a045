"""Walk through normal forms on the pentagon and the vacuum state of a small
graph product: reduced operators have zero moments, letters on adjacent
vertices commute, and letters on non-adjacent ones do not."""

import numpy as np

from graphprod import SimplicialGraph, is_reduced, normalize, pentagon, sigma
from graphprod.fock import FockSpace, reduced_operator, vacuum_state
from graphprod.expectations import random_letters
from graphprod.vertex import GroupAlgebra, MatrixAlgebra
from graphprod.words import FiniteGroup

g = pentagon()
for w in [(3, 2), (1, 3, 1), (2, 1, 2, 3), (1, 2, 1)]:
    print(f"{w}: normal form {normalize(g, w)}, reduced {is_reduced(g, w)}")
perm = sigma(g, (2, 3, 1), (3, 2, 1))
print("letters of (2, 3, 1) land at positions", perm.mapping, "of (3, 2, 1)")

algebras = {v: (MatrixAlgebra(np.diag([2 / 3, 1 / 3])) if v % 2 else GroupAlgebra(FiniteGroup.cyclic(2)))
            for v in g.vertices}
space = FockSpace(g, algebras, 3)
print(f"\nFock space truncated at length 3: {len(space.words)} words, dimension {space.dim}")

rng = np.random.default_rng(0)
for w in [(1,), (1, 3), (2, 4, 1)]:
    a = reduced_operator(space, random_letters(space, w, rng))
    print(f"vacuum moment of a reduced operator on {w}: {abs(vacuum_state(space, a)):.1e}")

x = algebras[1].random_element(rng, centered=True)
y = algebras[2].random_element(rng, centered=True)
z = algebras[3].random_element(rng, centered=True)
A, B, C = space.lam(1, x), space.lam(2, y), space.lam(3, z)
print(f"\n[lambda_1, lambda_2] on the safe zone: {(A @ B - B @ A).safe_norm():.1e}  (1 and 2 adjacent)")
print(f"[lambda_1, lambda_3] on the safe zone: {(A @ C - C @ A).safe_norm():.3f}  (1 and 3 not adjacent)")

edge = SimplicialGraph(["a", "b"], [("a", "b")])
m2 = MatrixAlgebra.tracial(2)
sp2 = FockSpace(edge, {"a": m2, "b": m2}, 2)
X, Y = np.array([[1, 2], [0, 3]], complex), np.array([[0, 1], [1, 1]], complex)
lhs = vacuum_state(sp2, sp2.lam("a", X) @ sp2.lam("b", Y))
print(f"\nedge graph: state(XY) = {lhs.real:.4f}, tr(X) tr(Y) = {m2.state(X).real * m2.state(Y).real:.4f}")
