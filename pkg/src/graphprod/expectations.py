"""Conditional expectations, freeness and intersection checks, modular data of
the vacuum state, right-hand generators, and products of ucp maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import BudgetError
from .fock import FockOperator, FockSpace, apply_letters, permutation_positions, reduced_operator
from .tables import csv_table, fmt
from .vertex import GroupAlgebra, MatrixAlgebra, VertexAlgebra
from .words import normalize

MAX_FLOW_TIME = 10.0
SURVIVOR_TOL = 1e-9


# ---------------------------------------------------------------------------
# conditional expectations


@dataclass(frozen=True)
class SubgraphProjection:
    vertices: frozenset
    mask: np.ndarray
    matrix: sp.csr_matrix


def subgraph_projection(space: FockSpace, vertices: Iterable) -> SubgraphProjection:
    """Projection onto the vacuum and all summands whose words use only ``vertices``."""
    verts = frozenset(vertices)
    unknown = [v for v in verts if v not in space.graph]
    if unknown:
        raise ValueError(f"{unknown!r} are not vertices of the graph")
    mask = np.zeros(space.dim, bool)
    for w in space.words:
        if set(w) <= verts:
            mask[space.block(w)] = True
    return SubgraphProjection(verts, mask, sp.diags(mask.astype(complex), format="csr"))


def cond_expectation(space: FockSpace, vertices, T: FockOperator) -> FockOperator:
    """Compression ``P T P`` onto the Fock space of the induced subgraph."""
    if T.reach > space.cutoff:
        raise BudgetError(f"reach {T.reach} exceeds the cutoff {space.cutoff}")
    P = vertices if isinstance(vertices, SubgraphProjection) else subgraph_projection(space, vertices)
    return FockOperator(space, (P.matrix @ T.matrix @ P.matrix).tocsr(), T.reach)


def random_letters(space: FockSpace, word, rng) -> list:
    return [(v, space.algebras[v].random_element(rng, centered=True)) for v in word]


@dataclass
class InstanceRow:
    instance: int
    residual: float
    budget: int


def rows_to_csv(rows: Sequence[InstanceRow], quantity: str) -> str:
    return csv_table(quantity, ["instance", "residual", "budget"],
                     ([r.instance, fmt(r.residual), r.budget] for r in rows))


@dataclass
class IntersectionReport:
    first: frozenset
    second: frozenset
    samples: int
    survivors: int
    outside: int
    reconstruction_residual: float = float("nan")


def intersection_check(space: FockSpace, first, second, samples: int = 10, seed: int = 0,
                       max_length: int | None = None, reconstruct: bool = False) -> IntersectionReport:
    """Expect elements of the first subgraph's algebra onto the second and
    list which reduced-operator components survive.

    Each sample is a random combination of the unit and reduced operators over
    the first subgraph.  The surviving components are read off from the vector
    ``E(x) Omega`` summand by summand; every survivor should sit over the
    intersection.  With ``reconstruct`` the surviving components are turned back
    into operators and compared with ``E(x)`` on the safe zone.
    """
    g = space.graph
    V0, V1 = frozenset(first), frozenset(second)
    L = space.cutoff if max_length is None else max_length
    if L > space.cutoff:
        raise BudgetError("sample length exceeds the cutoff")
    rng = np.random.default_rng(seed)
    words0 = [w for w in space.words if w and set(w) <= V0 and len(w) <= L]
    P1 = subgraph_projection(space, V1)
    both = V0 & V1
    survivors = outside = 0
    worst = 0.0
    for _ in range(samples):
        chosen = [words0[i] for i in rng.choice(len(words0), size=min(4, len(words0)), replace=False)] \
            if words0 else []
        terms = [random_letters(space, w, rng) for w in chosen]
        scalar = complex(rng.standard_normal() + 1j * rng.standard_normal())
        vec = scalar * space.vacuum()
        for letters in terms:
            vec = vec + apply_letters(space, letters, space.vacuum())
        vec = P1.matrix @ vec
        kept = []
        for w in space.words:
            if w and np.linalg.norm(vec[space.block(w)]) > SURVIVOR_TOL:
                survivors += 1
                kept.append(w)
                if not set(w) <= both:
                    outside += 1
        if reconstruct:
            reach = max((len(w) for w in chosen), default=0)
            x = space.identity() * scalar
            for letters in terms:
                x = x + reduced_operator(space, letters)
            ex = cond_expectation(space, P1, x)
            y = space.identity() * complex(vec[0])
            for w in kept:
                y = y + _operator_from_block(space, w, vec[space.block(w)])
            y = FockOperator(space, (P1.matrix @ y.matrix @ P1.matrix).tocsr(), reach)
            worst = max(worst, (ex - y).safe_norm())
    return IntersectionReport(V0, V1, samples, survivors, outside, worst if reconstruct else float("nan"))


def _subset_label(vs, g) -> str:
    return "-".join(str(v) for v in sorted(vs, key=g.index)) or "none"


def intersection_csv(space: FockSpace, reports: Sequence[IntersectionReport]) -> str:
    g = space.graph
    return csv_table("expectation_survivors_outside_intersection",
                     ["first", "second", "samples", "survivors", "outside", "reconstruction_residual"],
                     ([_subset_label(r.first, g), _subset_label(r.second, g), r.samples, r.survivors,
                       r.outside, fmt(r.reconstruction_residual)] for r in reports))


def intersection_sweep(space: FockSpace, samples: int = 3, seed: int = 0) -> list[IntersectionReport]:
    """:func:`intersection_check` over every ordered pair of vertex subsets."""
    vs = space.graph.vertices
    subsets = [frozenset(v for i, v in enumerate(vs) if mask >> i & 1) for mask in range(1 << len(vs))]
    return [intersection_check(space, a, b, samples=samples, seed=seed) for a in subsets for b in subsets]


def _operator_from_block(space: FockSpace, w, coeffs) -> FockOperator:
    shape = space.tensor_shape(w)
    bases = {v: space.algebras[v].centered_basis() for v in set(w)}
    out = space.zero()
    for flat, c in enumerate(coeffs):
        if abs(c) <= SURVIVOR_TOL * 1e-3:
            continue
        idx = np.unravel_index(flat, shape)
        letters = [(v, bases[v][i]) for v, i in zip(w, idx)]
        out = out + reduced_operator(space, letters) * c
    out.reach = len(w)
    return out


@dataclass
class FreenessReport:
    vertex: object
    rows: list = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max((r.residual for r in self.rows), default=0.0)

    def to_csv(self) -> str:
        return rows_to_csv(self.rows, "amalgamated_freeness_residual")


def freeness_pieces(space: FockSpace, v):
    """Word pools for the two sides of the amalgamated free product at ``v``.

    Side 0: words over Star(v) that use ``v``.  Side 1: words avoiding ``v`` that
    use a vertex outside Star(v).  Reduced operators over these words span the
    kernel of the expectation onto Link(v) inside each side.
    """
    g = space.graph
    star, link = g.star(v), g.link(v)
    side0 = [w for w in space.words if w and set(w) <= star and v in w]
    side1 = [w for w in space.words if w and v not in w and not set(w) <= link]
    return side0, side1


def freeness_check(space: FockSpace, v, instances=500, seed: int = 0,
                   max_reach: int | None = None) -> FreenessReport:
    """Evaluate ``E_Link(v)(a_1 ... a_n)`` on alternating centered products.

    ``instances`` is either a count (random instances from ``seed``) or an
    explicit list; an explicit instance is a list of ``(side, terms)`` pieces,
    each term a ``(coefficient, letters)`` pair.
    """
    g = space.graph
    budget = space.cutoff if max_reach is None else max_reach
    if budget > space.cutoff:
        raise BudgetError("instances would exceed the cutoff")
    side_words = freeness_pieces(space, v)
    if isinstance(instances, int):
        rng = np.random.default_rng(seed)
        instances = [_random_instance(space, side_words, budget, rng) for _ in range(instances)]
    P = subgraph_projection(space, g.link(v))
    report = FreenessReport(v)
    allowed = [set(map(tuple, side_words[0])), set(map(tuple, side_words[1]))]
    for k, inst in enumerate(instances):
        sides = [s for s, _ in inst]
        if any(a == b for a, b in zip(sides, sides[1:])):
            raise ValueError(f"instance {k} does not alternate")
        prod = space.identity()
        for side, terms in inst:
            piece = space.zero()
            for coef, letters in terms:
                word = normalize(g, [u for u, _ in letters])
                if word not in allowed[side] or len(word) != len(letters):
                    raise ValueError(f"instance {k}: word {word!r} is not centered on side {side}")
                piece = piece + reduced_operator(space, letters) * coef
            piece.reach = max(len(l) for _, l in terms)
            prod = prod @ piece
        if prod.reach > space.cutoff:
            raise BudgetError(f"instance {k} has reach {prod.reach} > cutoff {space.cutoff}")
        res = cond_expectation(space, P, prod).safe_norm()
        report.rows.append(InstanceRow(k, res, prod.reach))
    return report


def _random_instance(space, side_words, budget, rng):
    if budget < 2:
        raise BudgetError("alternating products need a reach budget of at least 2")
    n = int(rng.integers(2, budget + 1))
    total = int(rng.integers(n, budget + 1))
    # split the total reach into n positive parts
    cuts = np.sort(rng.choice(np.arange(1, total), size=n - 1, replace=False))
    lengths = np.diff(np.concatenate([[0], cuts, [total]]))
    side = int(rng.integers(2))
    inst = []
    for length in lengths:
        pool = [w for w in side_words[side] if len(w) <= length]
        terms = []
        for _ in range(int(rng.integers(1, 3))):
            w = pool[int(rng.integers(len(pool)))]
            coef = complex(rng.standard_normal() + 1j * rng.standard_normal())
            terms.append((coef, random_letters(space, w, rng)))
        inst.append((side, terms))
        side = 1 - side
    return inst


# ---------------------------------------------------------------------------
# modular theory of the vacuum state


class ModularData:
    """Modular conjugation and modular operator of the vacuum state.

    ``J`` is stored as the sparse matrix of ``x -> J conj(x)``.  On the summand
    of ``w`` it reverses the tensor factors, reshuffles them to the minimal form
    of the reversed word and applies the vertex conjugations there; ``nabla`` is
    the tensor product of the vertex modular operators.
    """

    def __init__(self, space: FockSpace):
        self.space = space
        rows, cols, vals = [0], [0], [1.0 + 0j]
        for w in space.words:
            if not w:
                continue
            wbar = normalize(space.graph, tuple(reversed(w)))
            shape = space.tensor_shape(w)
            n = space.block_size(w)
            # flat index of H_w -> flat index of H_{reversed w}
            rev = np.empty(n, int)
            rev[np.transpose(np.arange(n).reshape(shape), tuple(reversed(range(len(w))))).ravel()] = np.arange(n)
            P = permutation_positions(space, tuple(reversed(w)), wbar)[rev]
            Jt = np.ones((1, 1), complex)
            for u in wbar:
                Jt = np.kron(Jt, space.algebras[u].J[1:, 1:])
            block = Jt[:, P]
            r, c = np.nonzero(np.abs(block) > 0)
            rows.append(space.offsets[wbar] + r)
            cols.append(space.offsets[w] + c)
            vals.append(block[r, c])
        self.J = sp.csr_matrix((np.concatenate([np.atleast_1d(x) for x in vals]),
                                (np.concatenate([np.atleast_1d(x) for x in rows]),
                                 np.concatenate([np.atleast_1d(x) for x in cols]))),
                               shape=(space.dim, space.dim))
        self.nabla = self.nabla_power(1.0)

    def nabla_power(self, z) -> sp.csr_matrix:
        space = self.space
        powers = {v: a.nabla_power(z)[1:, 1:] for v, a in space.algebras.items()}
        blocks = [np.ones((1, 1), complex)]
        for w in space.words[1:]:
            b = np.ones((1, 1), complex)
            for u in w:
                b = np.kron(b, powers[u])
            blocks.append(b)
        return sp.block_diag(blocks, format="csr")

    def apply_J(self, vec):
        return self.J @ np.conj(vec)

    def apply_S(self, vec):
        """``S = J nabla^{1/2}``: sends ``a Omega`` to ``a* Omega``."""
        return self.apply_J(self.nabla_power(0.5) @ vec)

    def conjugate(self, T: FockOperator) -> FockOperator:
        """``J T J`` as a linear operator."""
        M = self.J @ T.matrix.conj() @ self.J.conj()
        return FockOperator(self.space, M.tocsr(), T.reach)

    def flow(self, t: float, T: FockOperator) -> FockOperator:
        """``nabla^{it} T nabla^{-it}``."""
        _check_time(t)
        U = self.nabla_power(1j * t)
        Ui = self.nabla_power(-1j * t)
        return FockOperator(self.space, (U @ T.matrix @ Ui).tocsr(), T.reach)

    def spectrum(self) -> np.ndarray:
        return np.sort(np.concatenate([np.linalg.eigvalsh(self.nabla[s, s].toarray())
                                       for s in (self.space.block(w) for w in self.space.words)]))


def modular_data(space: FockSpace) -> ModularData:
    return ModularData(space)


def _check_time(t):
    if abs(t) > MAX_FLOW_TIME:
        raise ValueError(f"flow time {t} outside [-{MAX_FLOW_TIME}, {MAX_FLOW_TIME}]")


def sigma_t(space: FockSpace, t: float, letters: Sequence) -> FockOperator:
    """Reduced operator whose letters are moved by their vertex modular flows."""
    _check_time(t)
    return reduced_operator(space, [(v, space.algebras[v].flow(t, a)) for v, a in letters])


def right_generator(space: FockSpace, v, a) -> FockOperator:
    """Right action of ``J_v a* J_v``; commutes with every left action."""
    return space.rho_op(v, space.algebras[v].right(a))


def commutant_image(space: FockSpace, letters: Sequence) -> FockOperator:
    """``J a J`` for the reduced operator ``a`` along ``letters``, written as a
    product of right generators.  Each factor is ``rho_v(J_v a_i J_v)``, i.e. the
    right generator of ``a_i*`` (``J a J`` is antilinear in ``a``)."""
    op = space.identity()
    for v, a in letters:
        alg = space.algebras[v]
        op = op @ right_generator(space, v, alg.adjoint(a))
    return op


# ---------------------------------------------------------------------------
# numerical suites


@dataclass
class SuiteRow:
    instance: int
    kind: str
    label: str
    residual: float
    budget: int


def suite_csv(rows: Sequence[SuiteRow], quantity: str) -> str:
    return csv_table(quantity, ["instance", "kind", "label", "residual", "budget"],
                     ([r.instance, r.kind, r.label, fmt(r.residual), r.budget] for r in rows))


def _word_label(w) -> str:
    return "-".join(map(str, w))


def _random_word(space: FockSpace, rng, max_len: int):
    pool = [w for w in space.words if 1 <= len(w) <= max_len]
    return pool[rng.integers(len(pool))]


def moment_suite(space: FockSpace, instances: int = 50, seed: int = 0) -> list[SuiteRow]:
    """Vacuum moments of random reduced operators; every residual should vanish."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(instances):
        w = _random_word(space, rng, space.cutoff)
        a = reduced_operator(space, random_letters(space, w, rng))
        rows.append(SuiteRow(i, "moment", _word_label(w), abs(complex(a.vacuum_image()[0])), len(w)))
    return rows


def commutation_suite(space: FockSpace, instances: int = 200, seed: int = 0,
                      kinds: Sequence[str] = ("edge", "left_right", "conjugation")) -> list[SuiteRow]:
    """Safe-zone residuals of the structural commutation identities.

    ``edge``        left actions at adjacent vertices commute
    ``left_right``  left actions commute with right generators at any vertices
    ``conjugation`` ``J a J`` of a reduced operator equals its product of right generators
    """
    g = space.graph
    rng = np.random.default_rng(seed)
    edges = sorted(tuple(sorted(e, key=g.index)) for e in g.edges)
    md = modular_data(space) if "conjugation" in kinds else None
    rows = []
    for kind in kinds:
        for i in range(instances):
            if kind == "edge":
                if not edges:
                    break
                u, v = edges[rng.integers(len(edges))]
                if rng.integers(2):
                    u, v = v, u
                x, y = space.algebras[u].random_element(rng), space.algebras[v].random_element(rng)
                A, B = space.lam(u, x), space.lam(v, y)
                res, label, budget = (A @ B - B @ A).safe_norm(), f"{u}|{v}", 2
            elif kind == "left_right":
                u = g.vertices[rng.integers(len(g))]
                v = g.vertices[rng.integers(len(g))]
                x, y = space.algebras[u].random_element(rng), space.algebras[v].random_element(rng)
                A, B = space.lam(u, x), right_generator(space, v, y)
                res, label, budget = (A @ B - B @ A).safe_norm(), f"{u}|{v}", 2
            elif kind == "conjugation":
                w = _random_word(space, rng, min(3, space.cutoff))
                letters = random_letters(space, w, rng)
                diff = md.conjugate(reduced_operator(space, letters)) - commutant_image(space, letters)
                res, label, budget = diff.safe_norm(), _word_label(w), len(w)
            else:
                raise ValueError(f"unknown commutation kind {kind!r}")
            rows.append(SuiteRow(i, kind, label, res, budget))
    return rows


def modular_spectrum_csv(space: FockSpace) -> str:
    vals = modular_data(space).spectrum()
    return csv_table("modular_operator_spectrum", ["index", "eigenvalue"],
                     ([i, fmt(float(np.real(x)))] for i, x in enumerate(vals)))


# ---------------------------------------------------------------------------
# ucp maps


class UcpMap:
    """State-preserving unital completely positive map on a vertex algebra.

    ``func`` must be linear.  Complete positivity is certified from the Choi
    matrix on matrix algebras; on group algebras only multipliers
    ``delta_g -> m(g) delta_g`` are accepted, certified by positive
    definiteness of ``m``.
    """

    def __init__(self, alg: VertexAlgebra, func: Callable, tol: float = 1e-9):
        self.alg = alg
        self.func = func
        canon = [alg.unvec(e) for e in np.eye(alg.N)]
        self.matrix = np.array([alg.vec(func(b)) for b in canon]).T
        one = alg.vec(alg.one())
        if np.max(np.abs(self.matrix @ one - one)) > 1e-10:
            raise ValueError("map is not unital")
        for b in canon:
            if abs(alg.state(func(b)) - alg.state(b)) > 1e-10:
                raise ValueError("map does not preserve the state")
        self.min_certificate_eigenvalue = self._certify()
        if self.min_certificate_eigenvalue < -tol:
            raise ValueError("map is not completely positive")
        self.T = alg._coord @ self.matrix @ alg.onb

    def _certify(self) -> float:
        alg = self.alg
        if isinstance(alg, MatrixAlgebra):
            n = alg.n
            choi = np.zeros((n * n, n * n), complex)
            for i in range(n):
                for j in range(n):
                    choi[i * n:(i + 1) * n, j * n:(j + 1) * n] = self(alg.unit(i, j))
            choi = (choi + choi.conj().T) / 2
            return float(np.linalg.eigvalsh(choi).min())
        if isinstance(alg, GroupAlgebra):
            M = self.matrix
            if np.max(np.abs(M - np.diag(np.diag(M)))) > 1e-12:
                raise ValueError("only multiplier maps can be certified on group algebras")
            m = np.diag(M)
            grp = alg.group
            K = np.array([[m[grp.mul(grp.inv(g), h)] for h in range(grp.order)] for g in range(grp.order)])
            K = (K + K.conj().T) / 2
            return float(np.linalg.eigvalsh(K).min())
        raise TypeError(f"cannot certify maps on {alg!r}")

    def __call__(self, x):
        return self.alg.unvec(self.matrix @ self.alg.vec(x))

    @property
    def centered_norm(self) -> float:
        return float(np.linalg.norm(self.T[1:, 1:], 2)) if self.alg.dim > 1 else 0.0

    @classmethod
    def identity(cls, alg):
        return cls(alg, lambda x: x)

    @classmethod
    def state_map(cls, alg):
        """``x -> state(x) 1``."""
        return cls(alg, lambda x: alg.scale(alg.one(), alg.state(x)))

    @classmethod
    def multiplier(cls, alg: GroupAlgebra, m):
        m = np.asarray(m, complex)
        return cls(alg, lambda x: m * np.asarray(x, complex))

    @classmethod
    def kraus(cls, alg: MatrixAlgebra, ops):
        ops = [np.asarray(k, complex) for k in ops]
        return cls(alg, lambda x: sum(k.conj().T @ x @ k for k in ops))


def perturb_ucp(phi: UcpMap, eps: float) -> UcpMap:
    """``x -> (phi(x) + eps state(x) 1) / (1 + eps)``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    alg = phi.alg
    return UcpMap(alg, lambda x: alg.scale(alg.add(phi(x), alg.scale(alg.one(), eps * alg.state(x))),
                                           1 / (1 + eps)))


class GraphProductUcp:
    """Letterwise product of per-vertex ucp maps and its Fock-space contraction."""

    def __init__(self, space: FockSpace, maps: Mapping):
        missing = [v for v in space.graph.vertices if v not in maps]
        if missing:
            raise ValueError(f"no ucp map for {missing!r}")
        for v, phi in maps.items():
            if phi.alg is not space.algebras[v]:
                raise ValueError(f"map at {v!r} acts on a different algebra")
        self.space = space
        self.maps = dict(maps)
        blocks = [np.ones((1, 1), complex)]
        for w in space.words[1:]:
            b = np.ones((1, 1), complex)
            for u in w:
                b = np.kron(b, self.maps[u].T[1:, 1:])
            blocks.append(b)
        self.blocks = blocks
        self.T = FockOperator(space, sp.block_diag(blocks, format="csr"), 0)

    def letters(self, letters: Sequence) -> list:
        return [(v, self.maps[v](a)) for v, a in letters]

    def __call__(self, letters: Sequence) -> FockOperator:
        return reduced_operator(self.space, self.letters(letters))

    def block_norms(self) -> dict:
        """Largest operator norm of the contraction over summands of each word length."""
        out: dict = {}
        for w in self.space.words:
            sl = self.space.block(w)
            nrm = float(np.linalg.norm(self.T.matrix[sl, sl].toarray(), 2))
            out[len(w)] = max(out.get(len(w), 0.0), nrm)
        return out


def ucp_graph_product(space: FockSpace, maps: Mapping) -> GraphProductUcp:
    return GraphProductUcp(space, maps)
