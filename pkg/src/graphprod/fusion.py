"""Label-level representation theory of graph products of compact quantum groups.

Irreducible representations of a graph product are reduced tensor words of
nontrivial vertex irreducibles.  An ``IrrWord`` is a tuple of
``(vertex, label)`` pairs whose vertex word is minimal; the empty tuple is the
trivial representation.  Only dimensions and fusion multiplicities are tracked,
never the corepresentation matrices themselves.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import IncompleteFusionError
from .words import (
    FiniteGroup,
    SimplicialGraph,
    _first_free,
    _last_free,
    _normal_letters,
    enumerate_minimal,
    is_minimal,
    is_reduced,
)

Label = Hashable
IrrWord = tuple
TRIVIAL_WORD: IrrWord = ()


class FusionData:
    """Fusion rules of one vertex quantum group, possibly a truncated fragment.

    ``rules[(a, b)]`` maps each label ``c`` to the multiplicity of ``c`` in
    ``a (x) b``.  A pair listed in ``complete`` promises that its rule is the
    whole decomposition; products with the trivial label are always complete
    and need not be listed.
    """

    def __init__(self, labels: Iterable[Label], dims: Mapping[Label, int], trivial: Label,
                 dual: Mapping[Label, Label], rules: Mapping[tuple, Mapping[Label, int]],
                 complete: Iterable[tuple] | None = None):
        self.labels = tuple(labels)
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate labels")
        known = set(self.labels)
        if trivial not in known:
            raise ValueError(f"trivial label {trivial!r} is not a label")
        self.trivial = trivial
        self.dims = {a: int(dims[a]) for a in self.labels}
        if any(d < 1 for d in self.dims.values()):
            raise ValueError("dimensions must be positive integers")
        if self.dims[trivial] != 1:
            raise ValueError("the trivial representation must have dimension 1")
        self._dual = {a: dual[a] for a in self.labels}
        for a, b in self._dual.items():
            if b not in known or self._dual[b] != a:
                raise ValueError("the contragredient map must be an involution on the labels")
            if self.dims[a] != self.dims[b]:
                raise ValueError(f"contragredient of {a!r} changes the dimension")
        if self._dual[trivial] != trivial:
            raise ValueError("the trivial label must be self-dual")

        self.rules: dict[tuple, dict] = {}
        for (a, b), out in rules.items():
            if a not in known or b not in known:
                raise ValueError(f"rule for unknown pair {(a, b)!r}")
            clean = {}
            for c, n in out.items():
                if c not in known:
                    raise ValueError(f"rule {(a, b)!r} produces unknown label {c!r}")
                if int(n) != n or n < 0:
                    raise ValueError("multiplicities must be nonnegative integers")
                if n:
                    clean[c] = int(n)
            self.rules[(a, b)] = clean
        self.complete = set(self.rules) if complete is None else {tuple(p) for p in complete}
        for a in self.labels:
            for pair, other in (((trivial, a), a), ((a, trivial), a)):
                if pair in self.rules and self.rules[pair] != {other: 1}:
                    raise ValueError(f"rule {pair!r} disagrees with the unit")
                self.rules[pair] = {other: 1}
                self.complete.add(pair)
        for pair in self.complete:
            if pair not in self.rules:
                raise ValueError(f"pair {pair!r} flagged complete but has no rule")
            a, b = pair
            total = sum(n * self.dims[c] for c, n in self.rules[pair].items())
            if total != self.dims[a] * self.dims[b]:
                raise ValueError(f"complete pair {pair!r} fails the dimension count "
                                 f"({total} != {self.dims[a] * self.dims[b]})")

    def __repr__(self):
        return f"FusionData(labels={self.labels!r})"

    def dim(self, a: Label) -> int:
        return self.dims[a]

    def dual(self, a: Label) -> Label:
        return self._dual[a]

    @property
    def nontrivial(self) -> list:
        return [a for a in self.labels if a != self.trivial]

    def is_complete(self, a: Label, b: Label) -> bool:
        return (a, b) in self.complete

    def product(self, a: Label, b: Label) -> dict:
        """Decomposition of ``a (x) b``; fails if the fragment does not cover it."""
        if (a, b) not in self.complete:
            raise IncompleteFusionError(f"fusion of {a!r} with {b!r} is not known completely")
        return self.rules[(a, b)]

    @property
    def is_group_dual(self) -> bool:
        """Every label one-dimensional and every complete product a single label."""
        return all(d == 1 for d in self.dims.values()) and all(
            len(self.rules[p]) == 1 for p in self.complete)

    @classmethod
    def group_dual(cls, group: FiniteGroup) -> "FusionData":
        """Dual of a finite group: labels are group elements and fusion is multiplication."""
        n = group.order
        rules = {(a, b): {group.mul(a, b): 1} for a in range(n) for b in range(n)}
        return cls(range(n), {a: 1 for a in range(n)}, group.identity,
                   {a: group.inv(a) for a in range(n)}, rules)

    @classmethod
    def rep_s3(cls) -> "FusionData":
        """Irreducible representations of the symmetric group on three letters."""
        labels = ("triv", "sgn", "std")
        rules = {
            ("sgn", "sgn"): {"triv": 1},
            ("sgn", "std"): {"std": 1},
            ("std", "sgn"): {"std": 1},
            ("std", "std"): {"triv": 1, "sgn": 1, "std": 1},
        }
        return cls(labels, {"triv": 1, "sgn": 1, "std": 2}, "triv",
                   {a: a for a in labels}, rules)

    @classmethod
    def su2_fragment(cls, max_twice_spin: int) -> "FusionData":
        """Spins ``0 .. max_twice_spin / 2`` of SU(2), labelled by twice the spin.

        Clebsch-Gordan products that would leave the fragment are kept truncated
        and flagged incomplete.
        """
        top = int(max_twice_spin)
        if top < 0:
            raise ValueError("max_twice_spin must be nonnegative")
        labels = range(top + 1)
        rules, complete = {}, []
        for a, b in itertools.product(labels, repeat=2):
            rules[(a, b)] = {c: 1 for c in range(abs(a - b), min(a + b, top) + 1, 2)}
            if a + b <= top:
                complete.append((a, b))
        return cls(labels, {a: a + 1 for a in labels}, 0, {a: a for a in labels}, rules, complete)

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "dims": [self.dims[a] for a in self.labels],
            "trivial": self.trivial,
            "dual": [self._dual[a] for a in self.labels],
            "rules": [[a, b, c, n] for (a, b), out in sorted(self.rules.items(), key=repr)
                      for c, n in sorted(out.items(), key=repr)],
            "complete": [list(p) for p in sorted(self.complete, key=repr)],
        }

    @classmethod
    def from_dict(cls, spec: Mapping) -> "FusionData":
        """Inverse of :meth:`to_dict`; ``rules`` is a list of ``[a, b, c, multiplicity]``
        and ``complete`` (optional) lists the pairs whose rules are exhaustive."""
        labels = list(spec["labels"])
        dims = dict(zip(labels, spec["dims"]))
        dual = dict(zip(labels, spec.get("dual", labels)))
        rules: dict = {}
        for a, b, c, n in spec.get("rules", []):
            rules.setdefault((a, b), {})[c] = n
        complete = spec.get("complete")
        if complete is not None:
            complete = [tuple(p) for p in complete]
        return cls(labels, dims, spec["trivial"], dual, rules, complete)


def _data_at(data: Mapping, v) -> FusionData:
    try:
        return data[v]
    except KeyError:
        raise ValueError(f"no fusion data for vertex {v!r}") from None


def normal_irr(g: SimplicialGraph, letters: Sequence[tuple]) -> IrrWord:
    """Reorder the letters of a reduced tensor word so its vertex word is minimal."""
    return tuple(_normal_letters(g, list(letters)))


def check_irr(g: SimplicialGraph, data: Mapping, alpha: Sequence[tuple]) -> IrrWord:
    alpha = tuple((v, a) for v, a in alpha)
    word = g.check_word(v for v, _ in alpha)
    for v, a in alpha:
        fd = _data_at(data, v)
        if a not in fd.dims:
            raise ValueError(f"unknown label {a!r} at vertex {v!r}")
        if a == fd.trivial:
            raise ValueError(f"letter at {v!r} carries the trivial label")
    if not is_minimal(g, word):
        raise ValueError(f"vertex word {word!r} is not minimal")
    return alpha


def irr_enumerate(g: SimplicialGraph, data: Mapping, L: int) -> list[IrrWord]:
    """All irreducible classes of length at most ``L``, shortest first."""
    if L < 0:
        raise ValueError("L must be nonnegative")
    out = []
    for w in enumerate_minimal(g, L):
        choices = [_data_at(data, v).nontrivial for v in w]
        for labels in itertools.product(*choices):
            out.append(tuple(zip(w, labels)))
    return out


def irr_dim(data: Mapping, alpha: IrrWord) -> int:
    return math.prod(_data_at(data, v).dim(a) for v, a in alpha)


def dual(g: SimplicialGraph, data: Mapping, alpha: IrrWord) -> IrrWord:
    """Contragredient: reverse the word and dualize every letter."""
    return normal_irr(g, [(v, _data_at(data, v).dual(a)) for v, a in reversed(alpha)])


def _absorb_right(g, data, state: Counter, v, b) -> Counter:
    out: Counter = Counter()
    fd = _data_at(data, v)
    for letters, mult in state.items():
        j = _last_free(g, v, [u for u, _ in letters])
        if j is None:
            out[letters + ((v, b),)] += mult
            continue
        for c, n in fd.product(letters[j][1], b).items():
            merged = letters[:j] + letters[j + 1:] if c == fd.trivial else \
                letters[:j] + ((v, c),) + letters[j + 1:]
            out[merged] += mult * n
    return out


def _absorb_left(g, data, state: Counter, v, a) -> Counter:
    out: Counter = Counter()
    fd = _data_at(data, v)
    for letters, mult in state.items():
        j = _first_free(g, v, [u for u, _ in letters])
        if j is None:
            out[((v, a),) + letters] += mult
            continue
        for c, n in fd.product(a, letters[j][1]).items():
            merged = letters[:j] + letters[j + 1:] if c == fd.trivial else \
                letters[:j] + ((v, c),) + letters[j + 1:]
            out[merged] += mult * n
    return out


def fuse(g: SimplicialGraph, data: Mapping, alpha: IrrWord, beta: IrrWord,
         from_right: bool = False) -> Counter:
    """Decomposition of ``alpha (x) beta`` as a multiset of irreducible classes.

    The letters of ``beta`` are absorbed into ``alpha`` one at a time.  A letter
    whose vertex can be shuffled to the end of the current word fuses with the
    last letter there; a trivial outcome deletes that letter, which leaves a
    reduced word, so later letters may again merge further inside.  With
    ``from_right`` the letters of ``alpha`` are absorbed into ``beta`` from the
    front instead; both orders give the same multiset by associativity.
    """
    alpha, beta = check_irr(g, data, alpha), check_irr(g, data, beta)
    if from_right:
        state = Counter({beta: 1})
        for v, a in reversed(alpha):
            state = _absorb_left(g, data, state, v, a)
    else:
        state = Counter({alpha: 1})
        for v, b in beta:
            state = _absorb_right(g, data, state, v, b)
    out: Counter = Counter()
    for letters, mult in state.items():
        assert is_reduced(g, [v for v, _ in letters])
        out[normal_irr(g, letters)] += mult
    return out


@dataclass
class AlignmentReport:
    """Comparison of the two absorption orders for one pair."""

    left: Counter
    right: Counter
    group_dual: bool

    @property
    def agree(self) -> bool:
        return self.left == self.right


def alignment_check(g: SimplicialGraph, data: Mapping, alpha: IrrWord, beta: IrrWord) -> AlignmentReport:
    """Fuse both ways.  Agreement is asserted only for group-dual vertex data;
    for other data a mismatch is reported, not raised."""
    rep = AlignmentReport(fuse(g, data, alpha, beta), fuse(g, data, alpha, beta, from_right=True),
                          all(_data_at(data, v).is_group_dual for v, _ in alpha + beta))
    if rep.group_dual and not rep.agree:
        raise AssertionError(f"group-dual fusion depends on alignment for {alpha!r}, {beta!r}")
    return rep


@dataclass(frozen=True)
class CentralLength:
    """Label function ``f(alpha) = sum of vertex lengths + shift * [alpha nontrivial]``."""

    vertex_lengths: Mapping
    shift: float = 0.0

    def __call__(self, alpha: IrrWord) -> float:
        if not alpha:
            return 0.0
        return float(sum(self.vertex_lengths[v][a] for v, a in alpha)) + self.shift

    def shell(self, alpha: IrrWord) -> int:
        """Index ``n`` of the spectral shell ``n <= f < n + 1`` holding ``alpha``."""
        return math.floor(self(alpha))

    def in_shell(self, n: int, alpha: IrrWord) -> bool:
        return self.shell(alpha) == n


def graph_length(data: Mapping, vertex_lengths: Mapping[object, Mapping | Callable]) -> CentralLength:
    """Sum of per-vertex lengths along an irreducible word.

    Each vertex length may be a mapping or a callable on labels.  It must vanish
    on the trivial label, be nonnegative and dual-invariant, and be subadditive
    on every complete product of the vertex; all of this is checked exactly.
    """
    table = {}
    for v, fd in data.items():
        if v not in vertex_lengths:
            raise ValueError(f"no length for vertex {v!r}")
        f = vertex_lengths[v]
        vals = {a: float(f(a) if callable(f) else f[a]) for a in fd.labels}
        if any(x < 0 or not math.isfinite(x) for x in vals.values()):
            raise ValueError(f"length at {v!r} must be finite and nonnegative")
        if vals[fd.trivial] != 0:
            raise ValueError(f"length at {v!r} must vanish on the trivial label")
        if any(vals[a] != vals[fd.dual(a)] for a in fd.labels):
            raise ValueError(f"length at {v!r} is not invariant under the contragredient")
        for a, b in fd.complete:
            if any(vals[c] > vals[a] + vals[b] for c in fd.rules[(a, b)]):
                raise ValueError(f"length at {v!r} is not subadditive on {(a, b)!r}")
        table[v] = vals
    return CentralLength(table)


def bump_length(f: CentralLength) -> CentralLength:
    """Add one on every nontrivial class; the result is again a central length
    and is at least one off the trivial class."""
    return CentralLength(f.vertex_lengths, f.shift + 1.0)


def word_length(data: Mapping) -> CentralLength:
    """Graph length with unit vertex lengths, i.e. the number of letters."""
    return graph_length(data, {v: {a: float(a != fd.trivial) for a in fd.labels}
                               for v, fd in data.items()})


@dataclass
class SubadditivityReport:
    worst_slack: float
    worst_pair: tuple | None
    pairs: int
    components: int
    slacks: list = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return self.worst_slack <= 0


def check_subadditive(g: SimplicialGraph, data: Mapping, f: CentralLength,
                      pairs: Iterable[tuple]) -> SubadditivityReport:
    """Largest ``f(gamma) - f(alpha) - f(beta)`` over components ``gamma`` of
    ``alpha (x) beta``; nonpositive means subadditive on the sampled pairs."""
    worst, where, npairs, ncomp, slacks = -math.inf, None, 0, 0, []
    for alpha, beta in pairs:
        budget = f(alpha) + f(beta)
        local = -math.inf
        for gamma in fuse(g, data, alpha, beta):
            local = max(local, f(gamma) - budget)
            ncomp += 1
        npairs += 1
        slacks.append(local)
        if local > worst:
            worst, where = local, (alpha, beta)
    if npairs == 0:
        worst = 0.0
    return SubadditivityReport(worst, where, npairs, ncomp, slacks)


def multiplier_product(families: Mapping[object, Mapping], alpha: IrrWord) -> np.ndarray:
    """Tensor product of per-letter matrices along ``alpha`` (1x1 identity on the
    trivial word).  Entries of a family may be scalars for one-dimensional labels."""
    out = np.ones((1, 1), complex)
    for v, a in alpha:
        try:
            m = families[v][a]
        except KeyError:
            raise ValueError(f"no multiplier matrix for label {a!r} at vertex {v!r}") from None
        out = np.kron(out, np.atleast_2d(np.asarray(m, complex)))
    return out
