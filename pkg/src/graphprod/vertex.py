"""Finite-dimensional vertex algebras with a faithful state.

Two kinds are supported: a full matrix algebra ``M_n`` with state
``x -> Tr(rho x)``, and the group algebra of a finite group with its Haar trace.
Each carries its GNS space in an orthonormal basis whose first vector is the
cyclic vector, plus the modular conjugation and modular operator of the state.

Antilinear operators (``S`` and ``J``) are stored as a matrix ``M`` acting as
``x -> M @ conj(x)``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .words import FiniteGroup

STATE_TOL = 1e-12
FAITHFUL_TOL = 1e-10


def _gram_schmidt(vectors, inner, tol=1e-10):
    basis = []
    for v in vectors:
        w = v.astype(complex)
        for _ in range(2):
            for b in basis:
                w = w - inner(w, b) * b
        nrm = np.sqrt(inner(w, w).real)
        if nrm > tol:
            basis.append(w / nrm)
    return np.array(basis).T


class VertexAlgebra:
    """Common GNS machinery.

    Subclasses describe the algebra in a canonical basis of size ``N`` through
    ``vec`` / ``unvec``, the product, the adjoint and the state.
    """

    kind: str
    N: int

    def _setup(self):
        canon = [self.unvec(e) for e in np.eye(self.N)]
        # <a, b> = state(b* a); gram[l, k] = <e_k, e_l>
        self.gram = np.array([[self.state(self.mul(self.adjoint(bl), bk)) for bk in canon]
                              for bl in canon])
        G = self.gram

        def inner(u, w):
            return np.vdot(w, G @ u)

        self.onb = _gram_schmidt([self.vec(self.one())] + list(np.eye(self.N)), inner)
        self.dim = self.onb.shape[1]
        self._coord = self.onb.conj().T @ G
        self._left = [self._left_vec(b) for b in canon]
        # S in orthonormal coordinates: c -> M conj(c)
        K = np.array([self.vec(self.adjoint(b)) for b in canon]).T
        M = self._coord @ K @ self.onb.conj()
        nabla = M.T @ M.conj()
        nabla = (nabla + nabla.conj().T) / 2
        evals, evecs = np.linalg.eigh(nabla)
        self._nabla_eig = (evals, evecs)
        self.S = M
        self.nabla = nabla
        self.J = M @ (evecs @ np.diag(evals ** -0.5) @ evecs.conj().T).conj()

    # generic algebra-level helpers

    def _left_vec(self, x):
        return np.array([self.vec(self.mul(x, self.unvec(e))) for e in np.eye(self.N)]).T

    def left_vec(self, x):
        """Left multiplication by ``x`` in canonical coordinates."""
        c = self.vec(x)
        return sum(ck * Lk for ck, Lk in zip(c, self._left) if ck != 0) if np.any(c) \
            else np.zeros((self.N, self.N), complex)

    def gns_vector(self, x) -> np.ndarray:
        """Coordinates of ``x xi`` in the orthonormal GNS basis."""
        return self._coord @ self.vec(x)

    def element(self, c) -> object:
        """The algebra element whose GNS vector has coordinates ``c``."""
        return self.unvec(self.onb @ np.asarray(c, complex))

    def left(self, x) -> np.ndarray:
        """Matrix of ``x`` acting on the GNS space (orthonormal basis)."""
        return self._coord @ self.left_vec(x) @ self.onb

    def center(self, x):
        return self.sub(x, self.scale(self.one(), self.state(x)))

    def centered_basis(self) -> list:
        """Algebra elements whose GNS vectors are the basis vectors of the centered part."""
        return [self.element(np.eye(self.dim)[i]) for i in range(1, self.dim)]

    def modular(self):
        """Modular pair ``(J, nabla)``: ``J`` as the matrix of ``x -> J conj(x)``."""
        return self.J, self.nabla

    def nabla_power(self, z) -> np.ndarray:
        evals, evecs = self._nabla_eig
        return evecs @ np.diag(evals.astype(complex) ** z) @ evecs.conj().T

    def flow(self, t: float, x):
        """Modular automorphism group of the state at time ``t``."""
        return self.element(self.nabla_power(1j * t) @ self.gns_vector(x))

    def right(self, x) -> np.ndarray:
        """``J x* J`` as a matrix on the GNS space; commutes with every ``left(y)``."""
        return self.J @ self.left(self.adjoint(x)).conj() @ self.J.conj()

    def is_tracial(self, tol=1e-10) -> bool:
        return np.allclose(self.nabla, np.eye(self.dim), atol=tol)

    def random_element(self, rng, centered=False):
        c = rng.standard_normal(self.N) + 1j * rng.standard_normal(self.N)
        x = self.unvec(c)
        return self.center(x) if centered else x

    def scale(self, x, s):
        return self.unvec(s * self.vec(x))

    def add(self, x, y):
        return self.unvec(self.vec(x) + self.vec(y))

    def sub(self, x, y):
        return self.unvec(self.vec(x) - self.vec(y))


class MatrixAlgebra(VertexAlgebra):
    """``M_n`` with the state ``x -> Tr(density @ x)``; elements are n x n arrays."""

    kind = "matrix"

    def __init__(self, density):
        rho = np.asarray(density, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density must be a square matrix")
        if np.max(np.abs(rho - rho.conj().T)) > STATE_TOL:
            raise ValueError("density is not self-adjoint")
        if abs(np.trace(rho) - 1) > STATE_TOL:
            raise ValueError("density does not have trace 1")
        rho = (rho + rho.conj().T) / 2
        if np.linalg.eigvalsh(rho).min() <= FAITHFUL_TOL:
            raise ValueError("state is not faithful")
        self.n = rho.shape[0]
        self.N = self.n * self.n
        self.density = rho
        self._setup()

    @classmethod
    def tracial(cls, n: int) -> "MatrixAlgebra":
        return cls(np.eye(n) / n)

    def vec(self, x):
        return np.asarray(x, complex).reshape(-1)

    def unvec(self, c):
        return np.asarray(c, complex).reshape(self.n, self.n)

    def one(self):
        return np.eye(self.n, dtype=complex)

    def mul(self, x, y):
        return np.asarray(x) @ np.asarray(y)

    def adjoint(self, x):
        return np.asarray(x).conj().T

    def state(self, x):
        return complex(np.trace(self.density @ np.asarray(x)))

    def left_vec(self, x):
        return np.kron(np.asarray(x, complex), np.eye(self.n))

    def unit(self, i, j):
        e = np.zeros((self.n, self.n), complex)
        e[i, j] = 1
        return e

    def __repr__(self):
        return f"MatrixAlgebra(n={self.n})"


class GroupAlgebra(VertexAlgebra):
    """Group algebra of a finite group with the Haar trace; elements are
    coefficient vectors indexed by group labels."""

    kind = "group"

    def __init__(self, group):
        self.group = group if isinstance(group, FiniteGroup) else FiniteGroup(group)
        self.N = self.group.order
        self._perm = []
        for g in range(self.N):
            P = np.zeros((self.N, self.N))
            P[self.group.table[g], np.arange(self.N)] = 1
            self._perm.append(P)
        self._setup()

    def vec(self, x):
        return np.asarray(x, complex).reshape(-1)

    def unvec(self, c):
        return np.asarray(c, complex).reshape(-1)

    def one(self):
        return self.delta(self.group.identity)

    def delta(self, g):
        d = np.zeros(self.N, complex)
        d[g] = 1
        return d

    def mul(self, x, y):
        return self.left_vec(x) @ np.asarray(y, complex)

    def left_vec(self, x):
        x = np.asarray(x, complex)
        return sum(x[g] * self._perm[g] for g in range(self.N))

    def adjoint(self, x):
        x = np.asarray(x, complex)
        return x[list(self.group.inverse_of)].conj()

    def state(self, x):
        return complex(np.asarray(x)[self.group.identity])

    def __repr__(self):
        return f"GroupAlgebra(order={self.N})"


def gns(kind: str, state) -> VertexAlgebra:
    """Build a vertex algebra: ``gns("matrix", density)`` or ``gns("group", table)``."""
    if kind == "matrix":
        return MatrixAlgebra(state)
    if kind == "group":
        return GroupAlgebra(state)
    raise ValueError(f"unknown vertex kind {kind!r}")


def center(alg: VertexAlgebra, x):
    return alg.center(x)


def modular(alg: VertexAlgebra):
    return alg.modular()


def polar_check(alg: VertexAlgebra) -> float:
    """Largest deviation of ``J nabla^{1/2}`` from ``S`` in the GNS basis."""
    return float(np.max(np.abs(alg.J @ scipy.linalg.sqrtm(alg.nabla).conj() - alg.S)))
