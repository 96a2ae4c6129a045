"""Truncated graph-product Fock space and the left/right vertex actions on it.

The space is ``C Omega`` plus one tensor summand ``H_w`` per minimal word ``w`` of
length at most the cutoff ``L``; ``H_w`` is the tensor product of the centered
GNS spaces of the letters of ``w``.  Coordinates are laid out in the order of
:func:`graphprod.words.enumerate_minimal`, each summand in row-major tensor order.

Every operator carries a *reach*: the largest increase of word length its exact
action can cause.  An operator of reach ``r`` is exact on all summands of length
at most ``L - r`` (its safe zone); anything that would need more is refused.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BudgetError
from .vertex import VertexAlgebra
from .words import (
    SimplicialGraph,
    enumerate_minimal,
    is_reduced,
    left_compatible,
    normalize,
    right_compatible,
    sigma,
    split_left,
    split_right,
)

DEFAULT_MAX_DIM = 200_000
CENTERED_TOL = 1e-12


class FockSpace:
    def __init__(self, graph: SimplicialGraph, algebras: Mapping, cutoff: int,
                 max_dim: int = DEFAULT_MAX_DIM):
        if cutoff < 0:
            raise ValueError("cutoff must be nonnegative")
        missing = [v for v in graph.vertices if v not in algebras]
        if missing:
            raise ValueError(f"no vertex algebra for {missing!r}")
        self.graph = graph
        self.algebras = {v: algebras[v] for v in graph.vertices}
        self.cutoff = cutoff
        self.centered_dim = {v: a.dim - 1 for v, a in self.algebras.items()}
        self.words = enumerate_minimal(graph, cutoff)
        self.position = {w: i for i, w in enumerate(self.words)}
        sizes = [self.block_size(w) for w in self.words]
        self.dim = int(sum(sizes))
        if self.dim > max_dim:
            raise BudgetError(f"Fock dimension {self.dim} exceeds the cap {max_dim}")
        self.offsets = dict(zip(self.words, np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(int)))
        self.lengths = np.concatenate([np.full(n, len(w)) for w, n in zip(self.words, sizes)])
        self._structures: dict = {}

    def __repr__(self):
        return f"FockSpace(vertices={len(self.graph)}, cutoff={self.cutoff}, dim={self.dim})"

    # layout

    def tensor_shape(self, word) -> tuple:
        return tuple(self.centered_dim[v] for v in word)

    def block_size(self, word) -> int:
        return int(np.prod(self.tensor_shape(word), dtype=int))

    def block(self, word) -> slice:
        off = self.offsets[tuple(word)]
        return slice(off, off + self.block_size(word))

    def vacuum(self) -> np.ndarray:
        e = np.zeros(self.dim, complex)
        e[0] = 1
        return e

    def safe_indices(self, reach: int) -> np.ndarray:
        if reach > self.cutoff:
            raise BudgetError(f"reach {reach} exceeds the cutoff {self.cutoff}")
        return np.flatnonzero(self.lengths <= self.cutoff - reach)

    def tensor_vector(self, letters: Sequence) -> np.ndarray:
        """The vector of ``a_1 xi (x) ... (x) a_n xi`` (centered parts) in its summand."""
        word = tuple(v for v, _ in letters)
        t = np.ones(1, complex)
        for v, a in letters:
            t = np.kron(t, self.algebras[v].gns_vector(a)[1:])
        target = normalize(self.graph, word)
        if len(target) != len(word):
            raise ValueError("word is not reduced")
        out = np.zeros(self.dim, complex)
        pos = permutation_positions(self, word, target)
        block = np.zeros(len(t), complex)
        block[pos] = t
        out[self.block(target)] = block
        return out

    # operators

    def identity(self) -> "FockOperator":
        return FockOperator(self, sp.identity(self.dim, complex, format="csr"), 0)

    def zero(self) -> "FockOperator":
        return FockOperator(self, sp.csr_matrix((self.dim, self.dim), dtype=complex), 0)

    def lam(self, v, x) -> "FockOperator":
        """Left action of the vertex algebra element ``x`` at ``v``."""
        return self.lam_op(v, self.algebras[v].left(x))

    def rho(self, v, x) -> "FockOperator":
        """Right action of ``x``: the mirror image of :meth:`lam`."""
        return self.rho_op(v, self.algebras[v].left(x))

    def lam_op(self, v, X) -> "FockOperator":
        """Left action of an arbitrary operator ``X`` on the GNS space at ``v``."""
        return self._assemble("left", v, X)

    def rho_op(self, v, X) -> "FockOperator":
        return self._assemble("right", v, X)

    def _assemble(self, side, v, X):
        X = np.asarray(X, complex)
        d = self.algebras[self.graph.vertices[self.graph.index(v)]].dim
        if X.shape != (d, d):
            raise ValueError(f"operator at {v!r} must be {d}x{d}, got {X.shape}")
        rows, cols, which = self._structure(side, v)
        M = sp.csr_matrix((X.ravel()[which], (rows, cols)), shape=(self.dim, self.dim))
        M.eliminate_zeros()
        return FockOperator(self, M, 1)

    def _structure(self, side, v):
        key = (side, v)
        if key not in self._structures:
            self._structures[key] = _action_structure(self, side, v)
        return self._structures[key]


def permutation_positions(space: FockSpace, src, dst) -> np.ndarray:
    """``P`` with ``P[i]`` the flat index in ``H_dst`` of flat index ``i`` of ``H_src``.

    Tensor factors travel with their letters, following :func:`sigma`.
    """
    src, dst = tuple(src), tuple(dst)
    shape = space.tensor_shape(src)
    n = int(np.prod(shape, dtype=int))
    if src == dst:
        return np.arange(n)
    s = sigma(space.graph, src, dst)
    axes = s.inverse().mapping
    dst_layout = np.transpose(np.arange(n).reshape(shape), axes).ravel()
    P = np.empty(n, dtype=int)
    P[dst_layout] = np.arange(n)
    return P


def q_unitary(space: FockSpace, src, dst) -> sp.csr_matrix:
    """Tensor-factor reshuffle ``H_src -> H_dst`` between equivalent reduced words."""
    P = permutation_positions(space, src, dst)
    n = len(P)
    return sp.csr_matrix((np.ones(n), (P, np.arange(n))), shape=(n, n))


def _action_structure(space: FockSpace, side: str, v):
    """Sparsity pattern of the left (or right) action at ``v``.

    Returns ``rows, cols, which`` so that the action of ``X`` is the sparse
    matrix with entries ``X.ravel()[which]`` at ``(rows, cols)``.

    For a summand ``H_w``:

    * if ``v`` can be attached to ``w`` (on the relevant side), the vacuum
      component of ``X xi`` scales the vector and the centered part of ``X xi``
      is tensored on, landing in the summand of the longer word (dropped past
      the cutoff);
    * otherwise ``w`` already carries ``v`` at that end; ``X`` acts on that
      tensor factor, its centered output staying in ``H_w`` and its vacuum
      component landing in the summand of the shorter word.
    """
    g = space.graph
    d = space.algebras[v].dim
    c = d - 1
    L = space.cutoff
    rows, cols, which = [], [], []
    ii, jj = np.arange(c), np.arange(c)
    for w in space.words:
        off_w = space.offsets[w]
        n_w = space.block_size(w)
        s = np.arange(n_w)
        attach = left_compatible(g, v, w) if side == "left" else right_compatible(g, v, w)
        if attach:
            rows.append(off_w + s)
            cols.append(off_w + s)
            which.append(np.zeros(n_w, dtype=int))
            longer = (v,) + w if side == "left" else w + (v,)
            target = normalize(g, longer)
            if len(target) > L or c == 0:
                continue
            P = permutation_positions(space, longer, target)
            I, S = np.meshgrid(ii, s, indexing="ij")
            flat = I * n_w + S if side == "left" else S * c + I
            rows.append(space.offsets[target] + P[flat.ravel()])
            cols.append(off_w + S.ravel())
            which.append((I.ravel() + 1) * d)
        else:
            rest = split_left(g, v, w) if side == "left" else split_right(g, v, w)
            shorter = (v,) + rest if side == "left" else rest + (v,)
            P = permutation_positions(space, shorter, w)
            n_r = space.block_size(rest)
            sr = np.arange(n_r)
            I, J, S = np.meshgrid(ii, jj, sr, indexing="ij")
            if side == "left":
                fi, fj = I * n_r + S, J * n_r + S
            else:
                fi, fj = S * c + I, S * c + J
            rows.append(off_w + P[fi.ravel()])
            cols.append(off_w + P[fj.ravel()])
            which.append(((I + 1) * d + (J + 1)).ravel())
            J2, S2 = np.meshgrid(jj, sr, indexing="ij")
            fj2 = J2 * n_r + S2 if side == "left" else S2 * c + J2
            rows.append(space.offsets[rest] + S2.ravel())
            cols.append(off_w + P[fj2.ravel()])
            which.append(J2.ravel() + 1)
    return (np.concatenate(rows).astype(int), np.concatenate(cols).astype(int),
            np.concatenate(which).astype(int))


@dataclass
class FockOperator:
    """Sparse matrix on a :class:`FockSpace` together with its reach."""

    space: FockSpace
    matrix: sp.csr_matrix
    reach: int

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            self._same_space(other)
            return FockOperator(self.space, (self.matrix @ other.matrix).tocsr(), self.reach + other.reach)
        return self.matrix @ other

    def __add__(self, other):
        self._same_space(other)
        return FockOperator(self.space, (self.matrix + other.matrix).tocsr(), max(self.reach, other.reach))

    def __sub__(self, other):
        self._same_space(other)
        return FockOperator(self.space, (self.matrix - other.matrix).tocsr(), max(self.reach, other.reach))

    def __mul__(self, scalar):
        return FockOperator(self.space, (self.matrix * scalar).tocsr(), self.reach)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    @property
    def H(self) -> "FockOperator":
        return FockOperator(self.space, self.matrix.conj().T.tocsr(), self.reach)

    def _same_space(self, other):
        if not isinstance(other, FockOperator) or other.space is not self.space:
            raise ValueError("operators live on different Fock spaces")

    def safe_columns(self) -> sp.csr_matrix:
        return self.matrix[:, self.space.safe_indices(self.reach)]

    def safe_norm(self) -> float:
        """Frobenius norm of the safe-zone columns (an upper bound for the
        operator norm of the restriction)."""
        return float(spla.norm(self.safe_columns())) if self.matrix.nnz else 0.0

    def vacuum_image(self) -> np.ndarray:
        if self.reach > self.space.cutoff:
            raise BudgetError(f"reach {self.reach} exceeds the cutoff {self.space.cutoff}")
        return self.matrix[:, [0]].toarray().ravel()

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def build(graph: SimplicialGraph, algebras: Mapping, cutoff: int, max_dim: int = DEFAULT_MAX_DIM) -> FockSpace:
    return FockSpace(graph, algebras, cutoff, max_dim)


def check_reduced_letters(space: FockSpace, letters: Sequence) -> tuple:
    word = tuple(v for v, _ in letters)
    if not word:
        raise ValueError("a reduced operator needs at least one letter")
    space.graph.check_word(word)
    if not is_reduced(space.graph, word):
        raise ValueError(f"word {word!r} is not reduced")
    for v, a in letters:
        if abs(space.algebras[v].state(a)) > CENTERED_TOL:
            raise ValueError(f"letter at {v!r} is not centered; apply center() first")
    return word


def reduced_operator(space: FockSpace, letters: Sequence) -> FockOperator:
    """Product of left actions of centered letters along a reduced word."""
    check_reduced_letters(space, letters)
    op = space.identity()
    for v, a in letters:
        op = op @ space.lam(v, a)
    return op


def apply_letters(space: FockSpace, letters: Sequence, vec: np.ndarray, side: str = "left") -> np.ndarray:
    """Apply ``lam(v1,a1) ... lam(vn,an)`` to a vector, right-most letter first."""
    act = space.lam if side == "left" else space.rho
    for v, a in reversed(list(letters)):
        vec = act(v, a).matrix @ vec
    return vec


def vacuum_state(space: FockSpace, T: FockOperator) -> complex:
    if T.reach > space.cutoff:
        raise BudgetError(f"reach {T.reach} exceeds the cutoff {space.cutoff}")
    return complex(T.matrix[0, 0])
