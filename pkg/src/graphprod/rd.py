"""Rapid-decay experiments for graph products of finite groups.

A Cayley ball of radius ``R`` in the block-length metric indexes a truncation of
``l2(G)``.  Left convolution by a function supported on lengths ``<= k`` maps
every basis vector of length ``<= R - k`` to vectors inside the ball, so on
those columns (the validity zone) the truncated operator is exact.  All norm
estimates are taken on such columns only.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import BudgetError
from .words import (
    IDENTITY,
    FiniteGroup,
    GroupElement,
    SimplicialGraph,
    _first_free,
    _normal_letters,
    generators,
)

POWER_TOL = 1e-8
POWER_MAX_ITER = 10_000
DEFAULT_TRIALS = 64
MAX_BALL = 400_000
DENSE_LIMIT = 4096


@dataclass
class CayleyBall:
    graph: SimplicialGraph
    groups: Mapping
    radius: int
    elements: list
    index: dict
    starts: list = field(repr=False)
    left: dict = field(repr=False)

    def __len__(self) -> int:
        return len(self.elements)

    def shell(self, n: int) -> range:
        if n < 0 or n > self.radius:
            return range(0)
        return range(self.starts[n], self.starts[n + 1])

    def ball_upto(self, n: int) -> range:
        n = min(n, self.radius)
        return range(0, self.starts[n + 1]) if n >= 0 else range(0)

    @property
    def shell_sizes(self) -> list[int]:
        return [self.starts[n + 1] - self.starts[n] for n in range(self.radius + 1)]

    def length(self, i: int) -> int:
        return len(self.elements[i])

    def zone(self, k: int) -> range:
        """Columns on which convolution by length-``k`` functions is exact."""
        if k > self.radius:
            raise BudgetError(f"support length {k} exceeds the radius {self.radius}")
        return self.ball_upto(self.radius - k)

    def locate(self, x) -> int:
        """Index of a group element given as a ``GroupElement``, a letter tuple or an index."""
        if isinstance(x, (int, np.integer)):
            if not 0 <= x < len(self):
                raise ValueError(f"index {x} outside the ball")
            return int(x)
        letters = x.letters if isinstance(x, GroupElement) else tuple(map(tuple, x))
        try:
            return self.index[letters]
        except KeyError:
            raise ValueError(f"{letters!r} is not a normal form inside the ball") from None

    def multiply_left(self, g: int, cols: np.ndarray) -> np.ndarray:
        """Indices of ``g h`` for ``h`` in ``cols`` (``-1`` once a partial product leaves the ball)."""
        idx = np.asarray(cols, dtype=np.int64)
        for letter in reversed(self.elements[g].letters):
            table = self.left[letter]
            out = np.full_like(idx, -1)
            ok = idx >= 0
            out[ok] = table[idx[ok]]
            idx = out
        return idx


def build_ball(g: SimplicialGraph, groups: Mapping[object, FiniteGroup], R: int,
               max_size: int = MAX_BALL) -> CayleyBall:
    """Breadth-first ball of radius ``R``, sorted by length then letters."""
    if R < 0:
        raise ValueError("radius must be nonnegative")
    for v in g.vertices:
        if v not in groups:
            raise ValueError(f"no group at vertex {v!r}")
    gens = [s.letters[0] for s in generators(g, groups)]
    shells = [[IDENTITY.letters]]
    seen = {IDENTITY.letters}
    total = 1
    for n in range(1, R + 1):
        nxt = []
        for x in shells[-1]:
            for v, s in gens:
                y = _times_generator(g, groups, v, s, x, R)
                if y is not None and len(y) == n and y not in seen:
                    seen.add(y)
                    nxt.append(y)
        total += len(nxt)
        if total > max_size:
            raise BudgetError(f"ball of radius {R} has more than {max_size} elements")
        nxt.sort(key=lambda e: [(g.index(v), s) for v, s in e])
        shells.append(nxt)
    elements = [GroupElement(x) for sh in shells for x in sh]
    index = {x.letters: i for i, x in enumerate(elements)}
    starts = [0]
    for sh in shells:
        starts.append(starts[-1] + len(sh))
    left = {}
    for v, s in gens:
        table = np.empty(len(elements), dtype=np.int64)
        for i, x in enumerate(elements):
            y = _times_generator(g, groups, v, s, x.letters, R)
            table[i] = -1 if y is None else index[y]
        left[(v, s)] = table
    return CayleyBall(g, dict(groups), R, elements, index, starts, left)


def _times_generator(g, groups, v, s, x: tuple, R: int):
    """Normal form of the generator ``(v, s)`` times ``x``, or None beyond length ``R``."""
    j = _first_free(g, v, [u for u, _ in x])
    if j is None:
        if len(x) + 1 > R:
            return None
        return _normal_letters(g, ((v, s),) + x)
    t = groups[v].mul(s, x[j][1])
    if t != groups[v].identity:
        return x[:j] + ((v, t),) + x[j + 1:]
    return _normal_letters(g, x[:j] + x[j + 1:])


def _coefficients(ball: CayleyBall, a) -> dict[int, complex]:
    items = a.items() if isinstance(a, Mapping) else a
    out: dict[int, complex] = {}
    for key, c in items:
        i = ball.locate(key)
        out[i] = out.get(i, 0) + complex(c)
    return out


@dataclass
class ConvolutionOperator:
    """Left convolution by ``a`` on the ball; columns outside the validity zone are left empty."""

    ball: CayleyBall
    coefficients: dict
    support_length: int
    matrix: sp.csr_matrix = field(repr=False)
    zone: range = field(repr=False)

    @property
    def l2_norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self.coefficients.values()))

    @property
    def l1_norm(self) -> float:
        return sum(abs(c) for c in self.coefficients.values())


def convolution(ball: CayleyBall, a) -> ConvolutionOperator:
    coeffs = _coefficients(ball, a)
    k = max((ball.length(i) for i in coeffs), default=0)
    zone = ball.zone(k)
    cols = np.arange(zone.start, zone.stop)
    rows, cs, data = [], [], []
    for g, c in coeffs.items():
        idx = ball.multiply_left(g, cols)
        assert (idx >= 0).all()
        rows.append(idx)
        cs.append(cols)
        data.append(np.full(len(cols), c))
    n = len(ball)
    if rows:
        mat = sp.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cs))), shape=(n, n))
    else:
        mat = sp.csr_matrix((n, n), dtype=complex)
    return ConvolutionOperator(ball, coeffs, k, mat, zone)


def _check_window(ball: CayleyBall, k: int, l: int, m: int):
    if min(k, l, m) < 0:
        raise ValueError("k, l, m must be nonnegative")
    if l > ball.radius - k:
        raise BudgetError(f"column shell {l} lies outside the validity zone for support length {k} "
                          f"at radius {ball.radius} (need l + k <= R)")
    if m > ball.radius:
        raise BudgetError(f"row shell {m} lies outside the ball of radius {ball.radius}")


def qk_compress(ball: CayleyBall, F: ConvolutionOperator, m: int, l: int) -> np.ndarray:
    """Dense block of ``F`` from column shell ``l`` to row shell ``m``."""
    _check_window(ball, F.support_length, l, m)
    rows, cols = ball.shell(m), ball.shell(l)
    return F.matrix[rows.start:rows.stop, cols.start:cols.stop].toarray()


def power_norm(B, rng: np.random.Generator, tol: float = POWER_TOL,
               max_iter: int = POWER_MAX_ITER) -> tuple[float, int]:
    """Largest singular value of ``B`` by power iteration on ``B* B``.

    Returns ``(estimate, iterations)``.  The estimate is ``|B x|`` for a unit
    vector ``x``, hence never above the true norm.  Iteration stops once the
    estimate changes by less than ``tol`` relatively.
    """
    n = B.shape[1]
    if n == 0 or B.shape[0] == 0 or (sp.issparse(B) and B.nnz == 0):
        return 0.0, 0
    BH = B.conj().T
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    est = 0.0
    for it in range(1, max_iter + 1):
        y = B @ x
        new = float(np.linalg.norm(y))
        if new == 0.0:
            return 0.0, it
        z = BH @ y
        x = z / np.linalg.norm(z)
        if abs(new - est) <= tol * new:
            return new, it
        est = new
    return est, max_iter


def spectral_norm(B, rng: np.random.Generator, tol: float = POWER_TOL,
                  max_iter: int = POWER_MAX_ITER, dense_limit: int = DENSE_LIMIT) -> tuple[float, bool]:
    """Largest singular value of ``B`` and whether the iteration converged.

    Small blocks go through a dense SVD.  Larger ones use Lanczos iteration on
    ``B* B`` (the Krylov-accelerated form of the power iteration) to relative
    tolerance ``tol``; if that fails to converge the plain power iteration
    takes over with the same budget.
    """
    r, c = B.shape
    if r == 0 or c == 0 or (sp.issparse(B) and B.nnz == 0):
        return 0.0, True
    if r * c <= dense_limit or min(r, c) <= 2:
        dense = B.toarray() if sp.issparse(B) else np.asarray(B)
        return float(np.linalg.norm(dense, 2)), True
    BH = B.conj().T.tocsr() if sp.issparse(B) else B.conj().T
    op = spla.LinearOperator((c, c), matvec=lambda x: BH @ (B @ x), dtype=complex)
    v0 = rng.standard_normal(c) + 1j * rng.standard_normal(c)
    try:
        lam = spla.eigsh(op, k=1, which="LA", tol=tol, maxiter=max_iter, v0=v0,
                         return_eigenvectors=False)[0]
        return float(math.sqrt(max(lam.real, 0.0))), True
    except spla.ArpackError:  # includes non-convergence and exact invariant subspaces
        est, it = power_norm(B, rng, tol, max_iter)
        return est, it < max_iter


class _BlockPattern:
    """Fixed sparsity of ``q_m F(a) q_l`` over all ``a`` supported on lengths ``<= k``."""

    def __init__(self, ball: CayleyBall, k: int, l: int, m: int):
        _check_window(ball, k, l, m)
        rows_sh, cols_sh = ball.shell(m), ball.shell(l)
        cols = np.arange(cols_sh.start, cols_sh.stop)
        r, c, which = [], [], []
        for g in ball.ball_upto(k):
            idx = ball.multiply_left(g, cols)
            hit = (idx >= rows_sh.start) & (idx < rows_sh.stop)
            if hit.any():
                j = ball.length(g)
                if not abs(j - l) <= m <= j + l:
                    raise AssertionError(f"nonzero block outside the length window: j={j}, l={l}, m={m}")
                r.append(idx[hit] - rows_sh.start)
                c.append(np.nonzero(hit)[0])
                which.append(np.full(hit.sum(), g))
        self.shape = (len(rows_sh), len(cols_sh))
        self.rows = np.concatenate(r) if r else np.zeros(0, np.int64)
        self.cols = np.concatenate(c) if c else np.zeros(0, np.int64)
        self.which = np.concatenate(which) if which else np.zeros(0, np.int64)
        self.lengths = np.array([ball.length(g) for g in self.which], dtype=np.int64)

    def matrix(self, a: np.ndarray, mask=None) -> sp.csr_matrix:
        data = a[self.which]
        if mask is not None:
            data = np.where(mask, data, 0)
        return sp.csr_matrix((data, (self.rows, self.cols)), shape=self.shape)


@dataclass
class RdEstimate:
    k: int
    l: int
    m: int
    trials: int
    seed: int
    estimate: float
    bound_chain: float
    converged: bool = True


def random_coefficients(ball: CayleyBall, k: int, trials: int, seed: int,
                        structured: bool = True) -> np.ndarray:
    """Unit-norm coefficient vectors on lengths ``<= k``, one row per sample.

    ``trials`` complex Gaussian draws; with ``structured`` the normalized
    indicators of every nonempty shell ``j <= k`` and of the whole support are
    appended (the classical near-extremal functions for length-weighted norm
    bounds).  The draws depend only on the seed and the support size, so equal
    supports give equal samples.
    """
    n = len(ball.ball_upto(k))
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((trials, n)) + 1j * rng.standard_normal((trials, n))
    if structured:
        extra = []
        for j in range(min(k, ball.radius) + 1):
            sh = ball.shell(j)
            if len(sh):
                v = np.zeros(n, complex)
                v[sh.start:sh.stop] = 1
                extra.append(v)
        if k > 0:
            extra.append(np.ones(n, complex))
        a = np.vstack([a] + extra)
    return a / np.linalg.norm(a, axis=1, keepdims=True)


def _dense_blocks(pattern: "_BlockPattern", samples: np.ndarray, mask=None) -> np.ndarray:
    # (g, h) determines g h, so pattern entries never collide
    B = np.zeros((len(samples),) + pattern.shape, complex)
    vals = samples[:, pattern.which]
    if mask is not None:
        vals = vals * mask
    B[:, pattern.rows, pattern.cols] = vals
    return B


def rd_norm(ball: CayleyBall, k: int, l: int, m: int, trials: int = DEFAULT_TRIALS, seed: int = 0,
            tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER, samples: np.ndarray | None = None,
            dense_limit: int = DENSE_LIMIT) -> RdEstimate:
    """Sampled supremum of ``|q_m F(a) q_l|`` over unit ``a`` on lengths ``<= k``.

    ``bound_chain`` is the largest (over the same samples) value of
    ``sum_j |q_m F(a_j) q_l|`` where ``a_j`` is the part of ``a`` on length
    exactly ``j``; it dominates the estimate by the triangle inequality.
    Blocks with at most ``dense_limit`` entries are normed by a batched dense
    SVD, larger ones by power iteration.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    pattern = _BlockPattern(ball, k, l, m)
    if samples is None:
        samples = random_coefficients(ball, k, trials, seed)
    if pattern.rows.size == 0:
        return RdEstimate(k, l, m, trials, seed, 0.0, 0.0)
    if k == 0:
        # a multiple of the unit: the block is a(e) times an identity
        val = float(np.abs(samples[:, 0]).max())
        return RdEstimate(k, l, m, trials, seed, val, val)
    parts = [pattern.lengths == j for j in np.unique(pattern.lengths)]
    if pattern.shape[0] * pattern.shape[1] <= dense_limit:
        best = np.linalg.norm(_dense_blocks(pattern, samples), 2, axis=(1, 2))
        chain = sum(np.linalg.norm(_dense_blocks(pattern, samples, mask), 2, axis=(1, 2)) for mask in parts)
        return RdEstimate(k, l, m, trials, seed, float(best.max()), float(np.max(chain)))
    rng = np.random.default_rng([seed, k, l, m])
    best, chain, converged = 0.0, 0.0, True
    for a in samples:
        est, ok = spectral_norm(pattern.matrix(a), rng, tol, max_iter, dense_limit)
        converged &= ok
        best = max(best, est)
        total = 0.0
        for mask in parts:
            part, ok = spectral_norm(pattern.matrix(a, mask), rng, tol, max_iter, dense_limit)
            converged &= ok
            total += part
        chain = max(chain, total)
    return RdEstimate(k, l, m, trials, seed, best, chain, converged)


def full_norm(ball: CayleyBall, a, seed: int = 0, tol: float = POWER_TOL,
              max_iter: int = POWER_MAX_ITER) -> tuple[float, ConvolutionOperator]:
    """Norm of the convolution operator on its validity zone (all rows of the ball)."""
    F = convolution(ball, a)
    z = F.zone
    B = F.matrix[:, z.start:z.stop]
    est, _ = spectral_norm(B, np.random.default_rng(seed), tol, max_iter)
    return est, F


@dataclass
class GrowthReport:
    sizes: list
    finite: bool
    polynomial_degree: float
    polynomial_residual: float
    exponential_rate: float
    exponential_residual: float

    @property
    def model(self) -> str:
        if self.finite:
            return "finite"
        return "polynomial" if self.polynomial_residual <= self.exponential_residual else "exponential"


def growth_series(ball: CayleyBall) -> GrowthReport:
    """Shell sizes with least-squares fits of ``log |S_n|`` against ``log n`` and ``n``."""
    sizes = ball.shell_sizes
    finite = 0 in sizes
    pts = [(n, s) for n, s in enumerate(sizes) if n >= 1 and s > 0]
    if len(pts) < 2:
        return GrowthReport(sizes, finite, 0.0, 0.0, 1.0, 0.0)
    n = np.array([p[0] for p in pts], float)
    y = np.log([p[1] for p in pts])

    def fit(x):
        A = np.vstack([x, np.ones_like(x)]).T
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        return coef[0], float(np.sqrt(np.mean((A @ coef - y) ** 2)))

    deg, pres = fit(np.log(n))
    rate, eres = fit(n)
    return GrowthReport(sizes, finite, float(deg), pres, float(math.exp(rate)), eres)


@dataclass
class FitReport:
    degree: int
    constant: float
    slope: float
    observations: dict
    residuals: dict

    def bound(self, k: int) -> float:
        return self.constant * (k + 1) ** self.degree


def rd_fit(estimates: Iterable[RdEstimate], max_degree: int = 4) -> FitReport:
    """Polynomial envelope ``c (k+1)^d`` for the worst estimate at each ``k``.

    The degree is the least integer not below the log-log slope of the
    observations over the upper half of the ``k`` range (so a bounded tail gives
    degree 0), capped at ``max_degree``; the constant is the least one making
    the envelope dominate every observation.  Residuals are log-gaps, all <= 0.
    """
    obs: dict[int, float] = {}
    for e in estimates:
        obs[e.k] = max(obs.get(e.k, 0.0), e.estimate)
    if not obs:
        raise ValueError("no estimates to fit")
    ks = sorted(k for k in obs if obs[k] > 0)
    tail = [k for k in ks if k >= max(ks) / 2] if ks else []
    slope = 0.0
    if len(tail) >= 2:
        x = np.log(np.array(tail, float) + 1)
        y = np.log([obs[k] for k in tail])
        slope = float(np.polyfit(x, y, 1)[0])
    degree = int(min(max_degree, max(0, math.ceil(slope - 1e-9))))
    const = max((obs[k] / (k + 1) ** degree for k in ks), default=0.0)
    resid = {k: (math.log(obs[k] / (const * (k + 1) ** degree)) if obs[k] > 0 else -math.inf) for k in obs}
    return FitReport(degree, const, slope, obs, resid)


@dataclass(frozen=True)
class Preset:
    """An experiment: the group, the radius, support lengths ``ks`` and the
    largest column and row shells ``l_max``, ``m_max`` of the table."""

    name: str
    graph: SimplicialGraph
    groups: Mapping
    radius: int
    ks: tuple
    l_max: int
    m_max: int
    probe: tuple
    note: str

    def clique_hypothesis(self) -> str:
        # every vertex group here is finite, so every clique subgroup is a finite group
        return "automatic: all clique subgroups are finite groups"

    def windows(self) -> list[tuple[int, int, int]]:
        """Default ``(k, l, m)`` table: ``l <= R - k`` and ``m`` in the length window."""
        R = self.radius
        out = []
        for k in self.ks:
            for l in range(min(self.l_max, R - k) + 1):
                for m in range(max(0, l - k), min(self.m_max, k + l, R) + 1):
                    out.append((k, l, m))
        return out


def _shell_one_uniform(g, groups):
    return tuple((s.letters, 1.0) for s in generators(g, groups))


def preset(name: str, radius: int | None = None, orders: Sequence[int] | None = None) -> Preset:
    """Named experiment configurations.

    ``dinfty``    free product of two copies of Z/2 (amenable, linear growth)
    ``z2free3``   free product of three copies of Z/2
    ``pentagon``  right-angled Coxeter group of the pentagon
    ``clique``    direct product of cyclic groups of the given orders
    ``free``      free product of cyclic groups of the given orders
    """
    if name == "dinfty":
        g = SimplicialGraph.edgeless(["s", "t"])
        groups = {v: FiniteGroup.cyclic(2) for v in g.vertices}
        R, ks, l_max, m_max = 16, range(7), 8, 8
        note = "probe: delta_s + delta_t, norm 2 in the limit"
    elif name == "z2free3":
        g = SimplicialGraph.edgeless(["a", "b", "c"])
        groups = {v: FiniteGroup.cyclic(2) for v in g.vertices}
        R, ks, l_max, m_max = 12, range(4), 5, 8
        note = "probe: sum of the three generators, norm 2*sqrt(2) in the limit"
    elif name == "pentagon":
        g = SimplicialGraph.cycle(5, [1, 2, 3, 4, 5])
        groups = {v: FiniteGroup.cyclic(2) for v in g.vertices}
        R, ks, l_max, m_max = 10, range(5), 6, 6
        note = "probe: sum of the five generators"
    elif name in ("clique", "free"):
        orders = [int(n) for n in (orders or (2, 3))]
        if not orders or any(n < 2 for n in orders):
            raise ValueError("orders must be integers >= 2")
        labels = [f"g{i}" for i in range(len(orders))]
        g = SimplicialGraph.complete(labels) if name == "clique" else SimplicialGraph.edgeless(labels)
        groups = {v: FiniteGroup.cyclic(n) for v, n in zip(labels, orders)}
        if name == "clique":
            # the ball saturates at radius len(orders); the extra room keeps the
            # tail of the table flat
            R = 2 * len(orders) + 2
            ks, l_max, m_max = range(R - len(orders) + 1), len(orders), len(orders)
        else:
            R, ks, l_max, m_max = 12, range(5), 6, 10
        note = f"cyclic orders {orders}; probe: sum of generators"
    else:
        raise ValueError(f"unknown preset {name!r}")
    if radius is not None:
        R = int(radius)
        if R < 1:
            raise ValueError("radius must be positive")
    ks = tuple(k for k in ks if k <= R)
    return Preset(name, g, groups, R, ks, l_max, m_max, _shell_one_uniform(g, groups), note)


def custom_preset(graph: SimplicialGraph, groups: Mapping, radius: int, ks=None,
                  l_max: int = 6, m_max: int = 8, name: str = "custom") -> Preset:
    """A preset for a user-supplied graph of finite groups, probing with the
    uniform sum over the generators."""
    if radius < 1:
        raise ValueError("radius must be positive")
    missing = [v for v in graph.vertices if v not in groups]
    if missing:
        raise ValueError(f"no group for vertices {missing!r}")
    ks = tuple(k for k in (range(min(radius, 4) + 1) if ks is None else ks) if k <= radius)
    return Preset(name, graph, dict(groups), radius, ks, l_max, m_max, _shell_one_uniform(graph, groups),
                  "user graph; probe: sum of generators")


PRESETS = ("dinfty", "z2free3", "pentagon", "clique", "free")


@dataclass
class Experiment:
    preset: Preset
    radius: int
    seed: int
    trials: int
    rows: list
    fit: FitReport
    full: float
    full_chain: float
    growth: GrowthReport

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "compressed_convolution_norm"])
        w.writerow(["preset", "R", "k", "l", "m", "trials", "seed", "estimate", "bound_chain",
                    "fit_degree", "fit_constant"])
        p = self.preset
        for e in self.rows:
            w.writerow([p.name, self.radius, e.k, e.l, e.m, e.trials, e.seed, f"{e.estimate:.10f}",
                        f"{e.bound_chain:.10f}", self.fit.degree, f"{self.fit.constant:.10f}"])
        kprobe = max(len(x) for x, _ in p.probe)
        w.writerow([p.name, self.radius, kprobe, "zone", "all", 1, self.seed, f"{self.full:.10f}",
                    f"{self.full_chain:.10f}", self.fit.degree, f"{self.fit.constant:.10f}"])
        return buf.getvalue()


def run_experiment(p: Preset, trials: int = DEFAULT_TRIALS, seed: int = 0, ks=None, ls=None, ms=None,
                   ball: CayleyBall | None = None, max_size: int = MAX_BALL) -> Experiment:
    """Norm table, its polynomial fit, the full-norm probe and the growth series.

    Without explicit ``ks``/``ls``/``ms`` the preset's windows are used.  Any
    explicitly requested column shell outside the validity zone (``k + l > R``)
    or row shell beyond the ball is refused with :class:`BudgetError`.
    """
    R = p.radius
    if ks is None and ls is None and ms is None:
        windows = p.windows()
    else:
        ks = tuple(p.ks if ks is None else ks)
        for k in ks:
            if k > R:
                raise BudgetError(f"support length {k} exceeds the radius {R}")
        if ls is None:
            windows = [(k, l, m) for k in ks for l in range(min(p.l_max, R - k) + 1)
                       for m in (range(max(0, l - k), min(p.m_max, k + l, R) + 1) if ms is None else ms)]
        else:
            windows = [(k, l, m) for k in ks for l in ls
                       for m in (range(max(0, l - k), min(k + l, R) + 1) if ms is None else ms)]
        for k, l, m in windows:
            if l > R - k:
                raise BudgetError(f"window k={k}, l={l} leaves the validity zone at R={R} (need k + l <= R)")
            if m > R:
                raise BudgetError(f"row shell {m} lies beyond the radius {R}")
    if ball is None:
        ball = build_ball(p.graph, p.groups, R, max_size)
    rows = []
    samples = {}
    for k, l, m in windows:
        if k not in samples:
            samples[k] = random_coefficients(ball, k, trials, seed)
        rows.append(rd_norm(ball, k, l, m, trials, seed, samples=samples[k]))
    fit = rd_fit(rows)
    full, F = full_norm(ball, list(p.probe), seed)
    return Experiment(p, R, seed, trials, rows, fit, full, F.l1_norm, growth_series(ball))


def block_length(ball: CayleyBall, x) -> int:
    return ball.length(ball.locate(x))
