"""End-space metric, rigid germs, the path groupoid and tail equivalence.

On a locally rigid tree, below ``epsilon_level`` every rooted isometry
between same-class subtrees is unique, so a germ is just a vertex pair.
``kappa_star`` sends it to the pair of diagram paths ending at the shared
collapsed class.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import product
from math import gcd
from typing import Sequence

from .errors import PreconditionError, StructureError
from .rigidity import is_locally_rigid
from .trees import (
    EndPoint,
    TreeSystem,
    Vertex,
    bisimulation,
    check_endpoint,
    class_of_path,
    collapse,
    label_sequence,
    path_from_labels,
    require_valid,
    vertices,
)


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Level:
    t0: int


def _align(x: EndPoint, y: EndPoint) -> int:
    """Number of positions after which comparing x and y repeats."""
    lx, ly = len(x.cycle), len(y.cycle)
    return max(len(x.prefix), len(y.prefix)) + lx * ly // gcd(lx, ly)


def distance(ts: TreeSystem, x: EndPoint, y: EndPoint):
    """``Level(t0)`` where t0 is the first disagreement, or ``Zero``."""
    check_endpoint(ts, x)
    check_endpoint(ts, y)
    for i in range(_align(x, y)):
        if x[i] != y[i]:
            return Level(i)
    return Zero()


def same_point(x: EndPoint, y: EndPoint) -> bool:
    return all(x[i] == y[i] for i in range(_align(x, y)))


@dataclass(frozen=True)
class Germ:
    """Germ of the unique isometry or similarity from ball(source) onto ball(target)."""

    source: Vertex
    target: Vertex

    @property
    def shift(self) -> int:
        return self.source.level - self.target.level

    def to_json(self) -> dict:
        return {"source": list(self.source.path), "target": list(self.target.path)}


def identity_germ(v: Vertex) -> Germ:
    return Germ(v, v)


def inverse(g: Germ) -> Germ:
    return Germ(g.target, g.source)


Edge = tuple[int, int, int, int]  # (level, parent class, child class, occurrence)


@dataclass(frozen=True)
class PathPair:
    """Two equal-length diagram paths from the top vertex with a common end.

    ``range`` is the path of the target ball, ``source`` that of the domain.
    """

    range: tuple[Edge, ...]
    source: tuple[Edge, ...]

    def __post_init__(self):
        if len(self.range) != len(self.source):
            raise StructureError("path pair paths must have equal length")
        if _terminal(self.range) != _terminal(self.source):
            raise StructureError("path pair ends at different diagram vertices")

    def to_json(self) -> dict:
        return {"range": [list(e) for e in self.range], "source": [list(e) for e in self.source]}


def _terminal(path: Sequence[Edge]) -> tuple[int, int]:
    if not path:
        return (0, 0)
    lv, _, k, _ = path[-1]
    return (lv + 1, k)


def compose_paths(pp2: PathPair, pp1: PathPair) -> PathPair:
    """``pp2 ∘ pp1``; the range of pp1 and the source of pp2 must be nested."""
    p1, q2 = pp1.range, pp2.source
    if p1[: len(q2)] == q2:
        return PathPair(pp2.range + p1[len(q2):], pp1.source)
    if q2[: len(p1)] == p1:
        return PathPair(pp2.range, pp1.source + q2[len(p1):])
    raise PreconditionError("path pairs are not composable: paths are not nested")


class GermGroupoid:
    """Local isometry and similarity germs of a locally rigid tree."""

    def __init__(self, ts: TreeSystem):
        verdict = is_locally_rigid(ts)
        if not verdict.rigid:
            raise PreconditionError(
                f"germ calculus needs a locally rigid tree; verdict is {verdict.status}"
            )
        self.ts = ts
        self.col = collapse(ts)
        self.epsilon_level = verdict.epsilon_level

    def _cls(self, v: Vertex) -> int:
        return class_of_path(self.ts, v.path)

    def block(self, v: Vertex) -> int:
        return self.col.block_of(v.level, self._cls(v))

    def _check_deep(self, v: Vertex) -> None:
        if v.level < self.epsilon_level:
            raise PreconditionError(
                f"vertex at level {v.level} lies above epsilon level {self.epsilon_level}"
            )

    def germ(self, source: Vertex, target: Vertex) -> Germ:
        self._check_deep(source)
        self._check_deep(target)
        if self.block(source) != self.block(target):
            raise PreconditionError("vertices have different collapsed classes")
        return Germ(source, target)

    def transport(self, a: Vertex, b: Vertex, suffix: Sequence[int]) -> tuple[int, ...]:
        """Image of path ``a + suffix`` under the unique isometry ball(a) → ball(b)."""
        ca, cb = self._cls(a), self._cls(b)
        la, lb = a.level, b.level
        out = []
        for pos in suffix:
            kids_a = self.ts.level(la)[ca]
            kids_b = self.ts.level(lb)[cb]
            want = self.col.block_of(la + 1, kids_a[pos])
            match = [j for j, k in enumerate(kids_b) if self.col.block_of(lb + 1, k) == want]
            if len(match) != 1:
                raise AssertionError("transport ambiguous in a rigid region")  # pragma: no cover
            j = match[0]
            out.append(j)
            ca, cb = kids_a[pos], kids_b[j]
            la, lb = la + 1, lb + 1
        return b.path + tuple(out)

    def compose(self, g2: Germ, g1: Germ) -> Germ:
        """``g2 ∘ g1`` after restricting to the smaller of the two middle balls."""
        b, c = g1.target.path, g2.source.path
        if b[: len(c)] == c:
            return Germ(g1.source, Vertex.of(self.transport(g2.source, g2.target, b[len(c):])))
        if c[: len(b)] == b:
            return Germ(Vertex.of(self.transport(g1.target, g1.source, c[len(b):])), g2.target)
        raise PreconditionError("germs are not composable: balls are disjoint")

    def kappa(self, v: Vertex) -> tuple[Edge, ...]:
        """The diagram path of a tree vertex."""
        edges = []
        cls = 0
        for lv, pos in enumerate(v.path):
            kids = self.ts.level(lv)[cls]
            if not 0 <= pos < len(kids):
                raise StructureError(f"vertex path leaves the tree at level {lv}")
            ck = [self.col.class_of(lv + 1, k) for k in kids]
            occ = ck[:pos].count(ck[pos])
            edges.append((lv, self.col.class_of(lv, cls), ck[pos], occ))
            cls = kids[pos]
        return tuple(edges)

    def kappa_inv(self, path: Sequence[Edge]) -> Vertex:
        cls, out = 0, []
        for lv, (elv, parent, child, occ) in enumerate(path):
            if elv != lv or self.col.class_of(lv, cls) != parent:
                raise StructureError(f"diagram path is broken at level {lv}")
            kids = self.ts.level(lv)[cls]
            hits = [j for j, k in enumerate(kids) if self.col.class_of(lv + 1, k) == child]
            if occ >= len(hits):
                raise StructureError(f"no edge occurrence {occ} at level {lv}")
            out.append(hits[occ])
            cls = kids[hits[occ]]
        return Vertex.of(out)

    def kappa_star(self, g: Germ) -> PathPair:
        self._check_deep(g.source)
        self._check_deep(g.target)
        if g.shift:
            raise PreconditionError("path pairs represent local isometry germs only")
        return PathPair(self.kappa(g.target), self.kappa(g.source))

    def kappa_star_inv(self, pp: PathPair) -> Germ:
        return self.germ(self.kappa_inv(pp.source), self.kappa_inv(pp.range))

    def enumerate_germs(self, level: int) -> list[Germ]:
        if level < self.epsilon_level:
            raise PreconditionError(
                f"level {level} lies above epsilon level {self.epsilon_level}"
            )
        by_block: dict[int, list[Vertex]] = {}
        for path, cls in vertices(self.ts, level):
            by_block.setdefault(self.col.block_of(level, cls), []).append(Vertex.of(path))
        out = []
        for vs in by_block.values():
            out.extend(Germ(a, b) for a in vs for b in vs)
        return sorted(out, key=lambda g: (g.source.path, g.target.path))


def germ_exists(ts: TreeSystem, w1: Vertex, w2: Vertex) -> tuple[bool, Germ | None]:
    """Whether ball(w1) and ball(w2) are rooted isometric; the germ when it is unique."""
    col = collapse(ts)
    b1 = col.block_of(w1.level, class_of_path(ts, w1.path))
    b2 = col.block_of(w2.level, class_of_path(ts, w2.path))
    if b1 != b2:
        return False, None
    verdict = is_locally_rigid(ts)
    if verdict.rigid and min(w1.level, w2.level) >= verdict.epsilon_level:
        return True, Germ(w1, w2)
    return True, None


# -- brute-force oracle ---------------------------------------------------------


def _subtree(ts, path: Sequence[int], depth: int):
    """Nested tuple shape of the depth-limited subtree below a vertex."""
    cls, lv = class_of_path(ts, path), len(path)

    def build(c: int, l: int, d: int):
        if d == 0:
            return ()
        return tuple(build(k, l + 1, d - 1) for k in ts.level(l)[c])

    return build(cls, lv, depth)


def _isomorphisms(s1, s2):
    """All rooted isomorphisms between two nested-tuple trees, as leaf-path maps."""
    if len(s1) != len(s2):
        return
    if not s1:
        yield {(): ()}
        return
    n = len(s1)

    def assign(i: int, used: frozenset, acc: dict):
        if i == n:
            yield dict(acc)
            return
        for j in range(n):
            if j in used:
                continue
            for sub in _isomorphisms(s1[i], s2[j]):
                step = dict(acc)
                step.update({(i,) + k: (j,) + v for k, v in sub.items()})
                yield from assign(i + 1, used | {j}, step)

    yield from assign(0, frozenset(), {})


def count_ball_isometries(ts, a: Sequence[int], b: Sequence[int], depth: int, observe: int) -> int:
    """Distinct restrictions to depth ``observe`` of the rooted isometries of
    the depth-``depth`` truncations below ``a`` and ``b``."""
    s1, s2 = _subtree(ts, a, depth), _subtree(ts, b, depth)
    seen = set()
    for iso in _isomorphisms(s1, s2):
        seen.add(tuple(sorted((k[:observe], v[:observe]) for k, v in iso.items())))
    return len(seen)


# -- tail equivalence ---------------------------------------------------------


def _labels(ts: TreeSystem, x: EndPoint) -> EndPoint:
    check_endpoint(ts, x)
    return label_sequence(ts, x) if ts.labels is not None else x


def tail_equivalent(ts: TreeSystem, x: EndPoint, y: EndPoint) -> int | None:
    """Minimal N with x_i = y_i for all i >= N (on edge labels), or None."""
    lx, ly = _labels(ts, x), _labels(ts, y)
    m = _align(lx, ly)
    if any(lx[i] != ly[i] for i in range(m - _period(lx, ly), m)):
        return None
    n = m
    while n > 0 and lx[n - 1] == ly[n - 1]:
        n -= 1
    return n


def _period(x: EndPoint, y: EndPoint) -> int:
    a, b = len(x.cycle), len(y.cycle)
    return a * b // gcd(a, b)


@dataclass(frozen=True)
class TailWitness:
    """The ball map z ↦ y[:level] + z[level:] on edge labels."""

    level: int
    source: tuple
    target: tuple

    def to_json(self) -> dict:
        return {"level": self.level, "source": list(self.source), "target": list(self.target)}


def isometry_witness(ts: TreeSystem, x: EndPoint, y: EndPoint) -> TailWitness:
    """Prefix-swap isometry between balls around x and y sending x to y.

    The level is the first k >= N at which the labelled subtrees below
    x[:k] and y[:k] agree, so the label substitution is defined on the
    whole ball.
    """
    n = tail_equivalent(ts, x, y)
    if n is None:
        raise PreconditionError("points are not tail equivalent")
    lx, ly = _labels(ts, x), _labels(ts, y)
    block = bisimulation(ts, labelled=True)
    k = n
    while True:
        bx = block[(ts.slot(k), class_of_path(ts, x.head(k)))]
        by = block[(ts.slot(k), class_of_path(ts, y.head(k)))]
        if bx == by:
            return TailWitness(k, lx.head(k), ly.head(k))
        k += 1
        if k > n + len(ts.slots) + _period(lx, ly) + 1:  # pragma: no cover
            raise AssertionError("labelled subtrees never agree along the common tail")


def verify_witness(ts: TreeSystem, w: TailWitness, x: EndPoint, y: EndPoint, depth: int) -> bool:
    """Check the witness is an isometry of the depth truncations sending x to y."""
    k = w.level
    src = path_from_labels(ts, w.source)
    dst = path_from_labels(ts, w.target)
    if src is None or dst is None or depth < k:
        return False
    below_src = [p for p, _ in vertices(ts, depth) if p[:k] == src]
    image = {}
    for p in below_src:
        labs = tuple(_label_path(ts, p))
        q = path_from_labels(ts, w.target + labs[k:])
        if q is None:
            return False
        image[p] = q
    targets = {p for p, _ in vertices(ts, depth) if p[:k] == dst}
    if set(image.values()) != targets or len(targets) != len(image):
        return False
    for p1, p2 in product(below_src, repeat=2):
        if _lcp(p1, p2) != _lcp(image[p1], image[p2]):
            return False
    return image.get(x.head(depth)) == y.head(depth)


def _label_path(ts: TreeSystem, path: Sequence[int]):
    cls = 0
    for lv, pos in enumerate(path):
        yield ts.label(lv, cls, pos)
        cls = ts.level(lv)[cls][pos]


def _lcp(a: Sequence[int], b: Sequence[int]) -> int:
    n = 0
    for u, v in zip(a, b):
        if u != v:
            break
        n += 1
    return n


def class_counts(ts: TreeSystem, level: int) -> Counter:
    """Number of vertices per collapsed class at a level."""
    require_valid(ts)
    col = collapse(ts)
    return Counter(col.class_of(level, c) for _, c in vertices(ts, level))
