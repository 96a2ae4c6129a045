"""Simplicial graphs, words over their vertices, and graph products of finite groups.

Words are plain tuples of vertex identifiers.  The empty tuple ``EMPTY`` stands
for the identity / vacuum; it is never produced as a "word" by the rewriting
functions except as that sentinel.

Two words are equivalent when they are related by the moves

* deleting one of two adjacent equal letters ``(.., v, v, ..) -> (.., v, ..)``
* swapping two adjacent letters that are joined by an edge.

A word is reduced when no sequence of moves shortens it.  Among the reduced
words of a class, the *minimal* one is the lexicographically least with respect
to the declared vertex order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import NotEquivalentError

Vertex = Hashable
Word = tuple

EMPTY: Word = ()


@dataclass(frozen=True, eq=False)
class SimplicialGraph:
    """Undirected loop-free graph with a total order on its vertices."""

    vertices: tuple
    edges: frozenset
    _index: dict = field(init=False, repr=False)
    _link: dict = field(init=False, repr=False)
    _cache: dict = field(init=False, repr=False)

    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[Sequence[Vertex]] = ()):
        verts = tuple(vertices)
        if len(set(verts)) != len(verts):
            raise ValueError("duplicate vertex in vertex list")
        index = {v: i for i, v in enumerate(verts)}
        pairs = set()
        for e in edges:
            e = tuple(e)
            if len(e) != 2:
                raise ValueError(f"edge {e!r} does not have two endpoints")
            u, v = e
            if u not in index or v not in index:
                raise ValueError(f"edge {e!r} has an unknown endpoint")
            if u == v:
                raise ValueError(f"loop at vertex {u!r}")
            p = frozenset((u, v))
            if p in pairs:
                raise ValueError(f"duplicate edge {e!r}")
            pairs.add(p)
        link = {v: set() for v in verts}
        for p in pairs:
            u, v = tuple(p)
            link[u].add(v)
            link[v].add(u)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", frozenset(pairs))
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_link", {v: frozenset(s) for v, s in link.items()})
        object.__setattr__(self, "_cache", {})

    def __eq__(self, other):
        if not isinstance(other, SimplicialGraph):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __hash__(self):
        return hash((self.vertices, self.edges))

    def __repr__(self):
        edges = sorted(tuple(sorted(e, key=self._index.__getitem__)) for e in self.edges)
        return f"SimplicialGraph({list(self.vertices)!r}, {edges!r})"

    def __contains__(self, v) -> bool:
        return v in self._index

    def __len__(self) -> int:
        return len(self.vertices)

    def index(self, v: Vertex) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise ValueError(f"unknown vertex {v!r}") from None

    def adjacent(self, u: Vertex, v: Vertex) -> bool:
        return v in self.link(u)

    def link(self, v: Vertex) -> frozenset:
        try:
            return self._link[v]
        except KeyError:
            raise ValueError(f"unknown vertex {v!r}") from None

    def star(self, v: Vertex) -> frozenset:
        return self.link(v) | {v}

    def cliques(self, s: int) -> list[frozenset]:
        if s < 0:
            raise ValueError("clique size must be nonnegative")
        out = []
        for combo in itertools.combinations(self.vertices, s):
            if all(self.adjacent(a, b) for a, b in itertools.combinations(combo, 2)):
                out.append(frozenset(combo))
        return out

    def induced(self, vertices: Iterable[Vertex]) -> "SimplicialGraph":
        keep = set(vertices)
        for v in keep:
            self.index(v)
        verts = [v for v in self.vertices if v in keep]
        return SimplicialGraph(verts, [tuple(e) for e in self.edges if e <= keep])

    def word_key(self, w: Word) -> tuple:
        return tuple(self._index[v] for v in w)

    def check_word(self, w: Iterable[Vertex]) -> Word:
        w = tuple(w)
        for v in w:
            if v not in self._index:
                raise ValueError(f"unknown vertex {v!r} in word")
        return w

    # constructors for the graphs that come up again and again

    @classmethod
    def edgeless(cls, vertices: Iterable[Vertex]) -> "SimplicialGraph":
        return cls(vertices, ())

    @classmethod
    def complete(cls, vertices: Iterable[Vertex]) -> "SimplicialGraph":
        verts = list(vertices)
        return cls(verts, itertools.combinations(verts, 2))

    @classmethod
    def cycle(cls, n: int, labels: Sequence[Vertex] | None = None) -> "SimplicialGraph":
        verts = list(labels) if labels is not None else list(range(1, n + 1))
        return cls(verts, [(verts[i], verts[(i + 1) % n]) for i in range(n)])

    @classmethod
    def path(cls, vertices: Iterable[Vertex]) -> "SimplicialGraph":
        verts = list(vertices)
        return cls(verts, zip(verts, verts[1:]))


def pentagon() -> SimplicialGraph:
    """The 5-cycle on vertices 1..5."""
    return SimplicialGraph.cycle(5)


def link(g: SimplicialGraph, v: Vertex) -> frozenset:
    return g.link(v)


def cliques(g: SimplicialGraph, s: int) -> list[frozenset]:
    return g.cliques(s)


def _merge_position(g: SimplicialGraph, w: Sequence[Vertex]) -> int | None:
    """Position of a letter that can be shuffled onto an earlier equal letter."""
    last: dict = {}
    for l, v in enumerate(w):
        k = last.get(v)
        if k is not None:
            lk = g.link(v)
            if all(u in lk for u in w[k + 1 : l]):
                return l
        last[v] = l
    return None


def is_reduced(g: SimplicialGraph, w: Sequence[Vertex]) -> bool:
    """True when no two equal letters are separated only by letters of their star."""
    return _merge_position(g, tuple(w)) is None


def reduce(g: SimplicialGraph, w: Sequence[Vertex]) -> Word:
    """A reduced word equivalent to ``w``, obtained by deleting mergeable repeats."""
    w = list(g.check_word(w))
    while True:
        pos = _merge_position(g, w)
        if pos is None:
            return tuple(w)
        del w[pos]


def _front_order(g: SimplicialGraph, w: Sequence[Vertex]) -> list[int]:
    """Positions of a reduced word in the order they appear in its minimal form.

    Greedy: emit the least vertex among the letters that can be moved to the
    front past everything before them.
    """
    rank = {v: g.index(v) for v in set(w)}
    remaining = list(range(len(w)))
    order = []
    while remaining:
        best = None
        seen: set = set()
        for pos in remaining:
            v = w[pos]
            if (best is None or rank[v] < rank[w[best]]) and seen <= g.link(v):
                best = pos
            seen.add(v)
        order.append(best)
        remaining.remove(best)
    return order


def normalize(g: SimplicialGraph, w: Sequence[Vertex]) -> Word:
    """The minimal word equivalent to ``w``."""
    w = tuple(w)
    cache = g._cache.setdefault("normalize", {})
    hit = cache.get(w)
    if hit is not None:
        return hit
    r = reduce(g, w)
    out = tuple(r[p] for p in _front_order(g, r))
    cache[w] = out
    return out


def is_minimal(g: SimplicialGraph, w: Sequence[Vertex]) -> bool:
    w = tuple(w)
    return normalize(g, w) == w


@dataclass(frozen=True)
class WordPermutation:
    """Letter positions of ``source`` mapped to positions of ``target``.

    ``mapping[i]`` is the (0-based) position in ``target`` that receives the
    letter at position ``i`` of ``source``.
    """

    source: Word
    target: Word
    mapping: tuple

    def __call__(self, i: int) -> int:
        return self.mapping[i]

    def inverse(self) -> "WordPermutation":
        inv = [0] * len(self.mapping)
        for i, j in enumerate(self.mapping):
            inv[j] = i
        return WordPermutation(self.target, self.source, tuple(inv))

    def then(self, other: "WordPermutation") -> "WordPermutation":
        """Composition: first ``self``, then ``other``."""
        if other.source != self.target:
            raise ValueError("permutations do not compose")
        return WordPermutation(self.source, other.target,
                               tuple(other.mapping[j] for j in self.mapping))


def sigma(g: SimplicialGraph, w: Sequence[Vertex], w2: Sequence[Vertex]) -> WordPermutation:
    """The unique letter-matching permutation between two equivalent reduced words
    that keeps repeated letters in their original relative order."""
    w, w2 = g.check_word(w), g.check_word(w2)
    if len(w) != len(w2):
        raise NotEquivalentError(f"{w!r} and {w2!r} have different lengths")
    if not is_reduced(g, w) or not is_reduced(g, w2):
        raise ValueError("sigma needs reduced words")
    if normalize(g, w) != normalize(g, w2):
        raise NotEquivalentError(f"{w!r} and {w2!r} are not equivalent")
    slots: dict = {}
    for j, v in enumerate(w2):
        slots.setdefault(v, []).append(j)
    taken: dict = {}
    mapping = []
    for v in w:
        k = taken.get(v, 0)
        mapping.append(slots[v][k])
        taken[v] = k + 1
    return WordPermutation(w, w2, tuple(mapping))


def enumerate_minimal(g: SimplicialGraph, L: int) -> list[Word]:
    """All minimal words of length at most ``L``, identity first, sorted by
    (length, lexicographic order of vertex indices)."""
    if L < 0:
        raise ValueError("maximal length must be nonnegative")
    cache = g._cache.setdefault("enumerate", {})
    if L in cache:
        return list(cache[L])
    levels = [[EMPTY]]
    for _ in range(L):
        nxt = set()
        for w in levels[-1]:
            for v in g.vertices:
                if right_compatible(g, v, w):
                    nxt.add(normalize(g, w + (v,)))
        if not nxt:
            break
        levels.append(sorted(nxt, key=g.word_key))
    out = [w for level in levels for w in level]
    cache[L] = tuple(out)
    return out


def left_compatible(g: SimplicialGraph, v: Vertex, w: Sequence[Vertex]) -> bool:
    """Whether ``(v,) + w`` is reduced (``w`` itself assumed reduced)."""
    w = tuple(w)
    lk = g.link(v)
    for u in w:
        if u == v:
            return False
        if u not in lk:
            return True
    return True


def right_compatible(g: SimplicialGraph, v: Vertex, w: Sequence[Vertex]) -> bool:
    """Whether ``w + (v,)`` is reduced (``w`` itself assumed reduced)."""
    w = tuple(w)
    lk = g.link(v)
    for u in reversed(w):
        if u == v:
            return False
        if u not in lk:
            return True
    return True


def _first_free(g, v, w):
    lk = g.link(v)
    for i, u in enumerate(w):
        if u == v:
            return i
        if u not in lk:
            return None
    return None


def _last_free(g, v, w):
    lk = g.link(v)
    for i in range(len(w) - 1, -1, -1):
        u = w[i]
        if u == v:
            return i
        if u not in lk:
            return None
    return None


def split_left(g: SimplicialGraph, v: Vertex, w: Sequence[Vertex]) -> Word:
    """For reduced ``w`` starting (up to shuffles) with ``v``: the minimal word
    ``u`` with ``w`` equivalent to ``(v,) + u``."""
    w = tuple(w)
    i = _first_free(g, v, w)
    if i is None:
        raise ValueError(f"{w!r} cannot be written with {v!r} in front")
    return normalize(g, w[:i] + w[i + 1 :])


def split_right(g: SimplicialGraph, v: Vertex, w: Sequence[Vertex]) -> Word:
    """Mirror of :func:`split_left`: ``w`` equivalent to ``u + (v,)``."""
    w = tuple(w)
    i = _last_free(g, v, w)
    if i is None:
        raise ValueError(f"{w!r} cannot be written with {v!r} at the end")
    return normalize(g, w[:i] + w[i + 1 :])


# ---------------------------------------------------------------------------
# graph products of finite groups


class FiniteGroup:
    """A finite group given by its multiplication table on labels 0..n-1.

    ``table[i][j]`` is the label of the product ``i * j``.
    """

    def __init__(self, table, names: Sequence[str] | None = None):
        t = np.asarray(table, dtype=int)
        n = t.shape[0]
        if t.shape != (n, n) or n == 0:
            raise ValueError("multiplication table must be square and nonempty")
        if t.min() < 0 or t.max() >= n:
            raise ValueError("multiplication table has out-of-range entries")
        ids = [e for e in range(n) if np.array_equal(t[e], np.arange(n)) and np.array_equal(t[:, e], np.arange(n))]
        if len(ids) != 1:
            raise ValueError("multiplication table has no two-sided identity")
        for row in t:
            if len(set(row)) != n:
                raise ValueError("multiplication table is not a Latin square")
        for col in t.T:
            if len(set(col)) != n:
                raise ValueError("multiplication table is not a Latin square")
        g_, h_, k_ = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
        if not np.array_equal(t[t[g_, h_], k_], t[g_, t[h_, k_]]):
            raise ValueError("multiplication table is not associative")
        self.table = t
        self.order = n
        self.identity = ids[0]
        self.inverse_of = tuple(int(np.flatnonzero(t[g] == ids[0])[0]) for g in range(n))
        self.names = tuple(names) if names is not None else tuple(str(i) for i in range(n))

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return self.inverse_of[a]

    def nontrivial(self) -> list[int]:
        return [g for g in range(self.order) if g != self.identity]

    def __repr__(self):
        return f"FiniteGroup(order={self.order})"

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        return cls([[(i + j) % n for j in range(n)] for i in range(n)])

    @classmethod
    def symmetric3(cls) -> "FiniteGroup":
        perms = list(itertools.permutations(range(3)))
        idx = {p: i for i, p in enumerate(perms)}
        table = [[idx[tuple(p[q[i]] for i in range(3))] for q in perms] for p in perms]
        return cls(table)


@dataclass(frozen=True)
class GroupElement:
    """Normal form in a graph product of groups: ``((vertex, label), ...)``."""

    letters: tuple = ()

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def word(self) -> Word:
        return tuple(v for v, _ in self.letters)


IDENTITY = GroupElement(())


def _normal_letters(g: SimplicialGraph, letters: Sequence[tuple]) -> tuple:
    word = tuple(v for v, _ in letters)
    return tuple(letters[p] for p in _front_order(g, word))


def group_element(g: SimplicialGraph, groups: Mapping[Vertex, FiniteGroup],
                  letters: Iterable[tuple]) -> GroupElement:
    """Normal form of an arbitrary product of vertex-group letters."""
    out = IDENTITY
    for v, s in letters:
        out = gp_multiply(g, groups, out, _letter(g, groups, v, s))
    return out


def _letter(g, groups, v, s) -> GroupElement:
    grp = groups[g.vertices[g.index(v)]]
    if not (0 <= s < grp.order):
        raise ValueError(f"label {s!r} is not an element of the group at {v!r}")
    if s == grp.identity:
        return IDENTITY
    return GroupElement(((v, s),))


def gp_multiply(g: SimplicialGraph, groups: Mapping[Vertex, FiniteGroup],
                x: GroupElement, y: GroupElement) -> GroupElement:
    """Normal form of the product ``x y``."""
    letters = list(x.letters)
    for v, s in y.letters:
        grp = groups[v]
        if not (0 <= s < grp.order) or s == grp.identity:
            raise ValueError(f"label {s!r} is not a nonidentity element at {v!r}")
        j = _last_free(g, v, [u for u, _ in letters])
        if j is None:
            letters.append((v, s))
            continue
        t = grp.mul(letters[j][1], s)
        if t == grp.identity:
            del letters[j]
        else:
            letters[j] = (v, t)
    for v, s in x.letters:
        grp = groups[v]
        if not (0 <= s < grp.order) or s == grp.identity:
            raise ValueError(f"label {s!r} is not a nonidentity element at {v!r}")
    return GroupElement(_normal_letters(g, letters))


def gp_inverse(g: SimplicialGraph, groups: Mapping[Vertex, FiniteGroup],
               x: GroupElement) -> GroupElement:
    return GroupElement(_normal_letters(g, [(v, groups[v].inv(s)) for v, s in reversed(x.letters)]))


def generators(g: SimplicialGraph, groups: Mapping[Vertex, FiniteGroup]) -> list[GroupElement]:
    """Single-letter elements, one per nonidentity vertex-group element."""
    return [GroupElement(((v, s),)) for v in g.vertices for s in groups[v].nontrivial()]
