"""Bratteli diagrams as sequences of nonnegative integer matrices.

``A_i`` is ``m_{i+1} x m_i``: column ``l`` is a level-``i`` vertex, row ``k`` a
level-``i+1`` vertex, and ``A_i[k][l]`` counts the edges between them.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product as cartesian
from math import gcd
from typing import Iterator, Sequence

from . import linalg
from .errors import StructureError
from .linalg import Matrix
from .trees import ProceduralTree, TreeSystem, collapse


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@dataclass(frozen=True)
class BratteliDiagram:
    prefix: tuple[Matrix, ...]
    cycle: tuple[Matrix, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(linalg.as_matrix(a) for a in self.prefix))
        object.__setattr__(self, "cycle", tuple(linalg.as_matrix(a) for a in self.cycle))
        mats = self.prefix + self.cycle
        if mats and len(mats[0][0]) != 1:
            raise StructureError("level 0 must consist of a single vertex")
        for i, a in enumerate(mats):
            rows, cols = linalg.shape(a)
            if rows == 0 or cols == 0 or any(len(r) != cols for r in a):
                raise StructureError(f"A_{i} is not a nonempty rectangular matrix")
            if any(x < 0 for r in a for x in r):
                raise StructureError(f"A_{i} has a negative entry")
            if any(not any(r) for r in a):
                raise StructureError(f"A_{i} has a zero row (a vertex with no incoming edge)")
            if any(not any(a[k][l] for k in range(rows)) for l in range(cols)):
                raise StructureError(f"A_{i} has a zero column (a vertex with no outgoing edge)")
        for i in range(len(mats) - 1):
            if len(mats[i]) != len(mats[i + 1][0]):
                raise StructureError(f"A_{i} and A_{i + 1} do not compose")
        if self.cycle and len(self.cycle[-1]) != len(self.cycle[0][0]):
            raise StructureError("cycle does not close up: sizes differ around the period")

    @property
    def periodic(self) -> bool:
        return bool(self.cycle)

    @property
    def depth(self) -> int | None:
        return None if self.cycle else len(self.prefix)

    def matrix(self, i: int) -> Matrix:
        if i < len(self.prefix):
            return self.prefix[i]
        if not self.cycle:
            raise IndexError(f"A_{i} beyond explicit depth {len(self.prefix)}")
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def m(self, i: int) -> int:
        return 1 if i == 0 else len(self.matrix(i - 1))

    def composite(self, start: int, stop: int) -> Matrix:
        """``A_{stop-1} ... A_start`` (identity when ``start == stop``)."""
        return linalg.product([self.matrix(i) for i in range(start, stop)], self.m(start))

    def to_json(self) -> dict:
        return {
            "kind": "eventually_periodic" if self.cycle else "explicit",
            "matrices": {
                "prefix": [[list(r) for r in a] for a in self.prefix],
                "cycle": [[list(r) for r in a] for a in self.cycle],
            },
        }

    @classmethod
    def from_json(cls, doc: dict) -> "BratteliDiagram":
        try:
            mats = doc["matrices"]
            return cls(tuple(mats.get("prefix", [])), tuple(mats.get("cycle", [])))
        except (KeyError, TypeError, AttributeError) as exc:
            raise StructureError(f"malformed diagram document: {exc}") from exc


def _minimal(prefix: list, cycle: list) -> BratteliDiagram:
    n = len(cycle)
    for p in range(1, n + 1):
        if n % p == 0 and all(cycle[i] == cycle[i % p] for i in range(n)):
            cycle = cycle[:p]
            break
    while prefix and cycle and prefix[-1] == cycle[-1]:
        cycle = [prefix.pop()] + cycle[:-1]
    return BratteliDiagram(tuple(prefix), tuple(cycle))


def diagram_of(ts: TreeSystem) -> BratteliDiagram:
    """The diagram whose level-i vertices are the subtree classes at level i."""
    if isinstance(ts, ProceduralTree):
        collapse(ts)  # raises with the unfolding hint
    tree = collapse(ts).tree

    def mat(level) -> Matrix:
        nxt = tree.next_slot(level)
        width = len(tree.slots[nxt])
        return tuple(
            tuple(children.count(k) for children in tree.slots[level]) for k in range(width)
        )

    if not tree.periodic:
        return BratteliDiagram(tuple(mat(s) for s in range(len(tree.prefix) - 1)))
    slots = range(len(tree.slots))
    mats = [mat(s) for s in slots]
    return _minimal(mats[: len(tree.prefix)], mats[len(tree.prefix):])


# -- telescoping -------------------------------------------------------------------


@dataclass(frozen=True)
class Cuts:
    """Cut levels ``initial[0]=0 < initial[1] < ...``, then steps of ``step``.

    ``step=None`` means the cut list is finite.
    """

    initial: tuple[int, ...] = (0,)
    step: int | None = 1

    def __post_init__(self):
        object.__setattr__(self, "initial", tuple(int(x) for x in self.initial))
        init = self.initial
        if not init or init[0] != 0:
            raise StructureError("cut levels must start at 0")
        if any(b <= a for a, b in zip(init, init[1:])):
            raise StructureError("cut levels must be strictly increasing")
        if self.step is not None and self.step < 1:
            raise StructureError("cut step must be positive")

    def __call__(self, j: int) -> int:
        if j < len(self.initial):
            return self.initial[j]
        if self.step is None:
            raise IndexError(j)
        return self.initial[-1] + (j - len(self.initial) + 1) * self.step

    def __len__(self):
        if self.step is not None:
            raise TypeError("infinite cut pattern")
        return len(self.initial)

    def then(self, outer: "Cuts") -> "Cuts":
        """Cuts of telescoping by ``self`` and then by ``outer``: ``j -> self(outer(j))``."""
        if self.step is None or outer.step is None:
            vals, j = [], 0
            while True:
                try:
                    vals.append(self(outer(j)))
                except IndexError:
                    break
                j += 1
            return Cuts(tuple(vals), None)
        # past J both patterns are arithmetic
        J = len(outer.initial) - 1
        while outer(J) < len(self.initial) - 1:
            J += 1
        return Cuts(tuple(self(outer(j)) for j in range(J + 1)), self.step * outer.step)


PAIRS = Cuts((0,), 2)


def telescope(d: BratteliDiagram, cuts: Cuts | Sequence[int]) -> BratteliDiagram:
    """Replace each block of levels between consecutive cuts by the product."""
    if not isinstance(cuts, Cuts):
        cuts = Cuts(tuple(cuts), None)

    def block(j):
        return d.composite(cuts(j), cuts(j + 1))

    if not d.periodic or cuts.step is None:
        out, j = [], 0
        while True:
            try:
                hi = cuts(j + 1)
            except IndexError:
                break
            if d.depth is not None and hi > d.depth:
                break
            out.append(block(j))
            j += 1
        return BratteliDiagram(tuple(out))
    p, c = len(d.prefix), len(d.cycle)
    j0 = len(cuts.initial) - 1
    while cuts(j0) < p:
        j0 += 1
    period = c // gcd(c, cuts.step)
    mats = [block(j) for j in range(j0 + period)]
    return _minimal(mats[:j0], mats[j0:])


# -- isomorphism -------------------------------------------------------------------


def _next_perms(a: Matrix, b: Matrix, sigma: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    """All row bijections tau with ``b[tau[k]][sigma[l]] == a[k][l]``."""
    if len(a) != len(b):
        return
    rows_a = [tuple(r[l] for l in range(len(sigma))) for r in a]
    rows_b = [tuple(r[sigma[l]] for l in range(len(sigma))) for r in b]
    groups: dict = {}
    for k, r in enumerate(rows_a):
        groups.setdefault(r, []).append(k)
    targets: dict = {}
    for k, r in enumerate(rows_b):
        targets.setdefault(r, []).append(k)
    if {r: len(v) for r, v in groups.items()} != {r: len(v) for r, v in targets.items()}:
        return
    keys = sorted(groups)
    for choice in cartesian(*(permutations(targets[r]) for r in keys)):
        tau = [0] * len(a)
        for r, images in zip(keys, choice):
            for k, img in zip(groups[r], images):
                tau[k] = img
        yield tuple(tau)


@dataclass(frozen=True)
class IsoResult:
    isomorphic: bool
    exact: bool
    permutations: tuple[tuple[int, ...], ...] = ()

    def __bool__(self):
        return self.isomorphic


def _aligned(d1: BratteliDiagram, d2: BratteliDiagram) -> tuple[int, int]:
    p = max(len(d1.prefix), len(d2.prefix))
    return p, _lcm(len(d1.cycle), len(d2.cycle))


def is_isomorphic(d1: BratteliDiagram, d2: BratteliDiagram, depth: int = 8) -> IsoResult:
    """Level-preserving isomorphism search.

    Eventually periodic pairs get an exact verdict: permutations at the
    start of the aligned period form a finite graph, and an isomorphism of
    the infinite diagrams exists iff a state reachable through the prefix
    lies on an infinite path of that graph.  Otherwise the verdict covers
    the first ``depth`` levels only.
    """
    if d1.periodic and d2.periodic:
        p, period = _aligned(d1, d2)
        frontier = {(0,): ((0,),)}
        for i in range(p):
            frontier = {
                tau: hist + (tau,)
                for sigma, hist in frontier.items()
                for tau in _next_perms(d1.matrix(i), d2.matrix(i), sigma)
            }
        starts = dict(frontier)

        succ: dict = {}
        paths: dict = {}
        todo = list(starts)
        while todo:
            sigma = todo.pop()
            if sigma in succ:
                continue
            layer = {sigma: (sigma,)}
            for i in range(p, p + period):
                layer = {
                    tau: hist + (tau,)
                    for s, hist in layer.items()
                    for tau in _next_perms(d1.matrix(i), d2.matrix(i), s)
                }
            succ[sigma] = set(layer)
            paths.update({(sigma, t): h for t, h in layer.items()})
            todo.extend(t for t in layer if t not in succ)
        alive = set(succ)
        while True:
            keep = {s for s in alive if succ[s] & alive}
            if keep == alive:
                break
            alive = keep
        good = sorted(s for s in starts if s in alive)
        if not good:
            return IsoResult(False, True)
        sigma = good[0]
        nxt = min(t for t in succ[sigma] if t in alive)
        witness = starts[sigma] + paths[(sigma, nxt)][1:]
        return IsoResult(True, True, witness)

    limit = depth
    for d in (d1, d2):
        if d.depth is not None:
            limit = min(limit, d.depth)
    frontier = {(0,): ((0,),)}
    for i in range(limit):
        frontier = {
            tau: hist + (tau,)
            for sigma, hist in frontier.items()
            for tau in _next_perms(d1.matrix(i), d2.matrix(i), sigma)
        }
        if not frontier:
            return IsoResult(False, False)
    return IsoResult(True, False, frontier[min(frontier)])


@dataclass(frozen=True)
class Equivalent:
    cuts1: Cuts
    cuts2: Cuts
    iso: IsoResult

    verdict = "equivalent"


@dataclass(frozen=True)
class Unknown:
    bound: int

    verdict = "unknown"


def _patterns(bound: int) -> list[Cuts]:
    out = []
    for first in range(1, bound + 1):
        for step in range(1, bound + 1):
            out.append(Cuts((0,), step) if first == step else Cuts((0, first), step))
    return out


def equivalence_search(d1: BratteliDiagram, d2: BratteliDiagram, bound: int = 3):
    """Look for telescopings of both diagrams that become isomorphic.

    Sound but incomplete: a hit returns a checkable witness; exhausting
    the bound returns :class:`Unknown`, never a claim of inequivalence.
    Candidates are tried in a fixed order (smallest total cut size first).
    """
    pats = _patterns(bound)
    pairs = sorted(
        ((a, b) for a in pats for b in pats),
        key=lambda ab: (
            ab[0](1) + ab[0].step + ab[1](1) + ab[1].step,
            ab[0](1), ab[0].step, ab[1](1), ab[1].step,
        ),
    )
    cache1: dict = {}
    cache2: dict = {}
    for c1, c2 in pairs:
        t1 = cache1.setdefault(c1, telescope(d1, c1))
        t2 = cache2.setdefault(c2, telescope(d2, c2))
        res = is_isomorphic(t1, t2)
        if res.isomorphic and res.exact:
            return Equivalent(c1, c2, res)
    return Unknown(bound)


def check_equivalence_witness(d1: BratteliDiagram, d2: BratteliDiagram, w: Equivalent) -> bool:
    t1, t2 = telescope(d1, w.cuts1), telescope(d2, w.cuts2)
    perms = w.iso.permutations
    for i in range(len(perms) - 1):
        a, b = t1.matrix(i), t2.matrix(i)
        s, t = perms[i], perms[i + 1]
        if any(b[t[k]][s[l]] != a[k][l] for k in range(len(a)) for l in range(len(s))):
            return False
    return True


# -- paths and rendering --------------------------------------------------------------


def path_counts(d: BratteliDiagram, level: int) -> tuple[int, ...]:
    """Number of paths from the top vertex to each level vertex."""
    k: tuple[int, ...] = (1,)
    for i in range(level):
        k = linalg.matvec(d.matrix(i), k)
    return k


def to_dot(d: BratteliDiagram, max_level: int, name: str = "bratteli") -> str:
    """Deterministic DOT text: one rank per level, parallel edges repeated."""
    if d.depth is not None:
        max_level = min(max_level, d.depth)
    lines = [f'digraph "{name}" {{', "  rankdir=LR;",
             '  node [shape=circle, style=filled, fillcolor=black, label="", width=0.12];']
    for i in range(max_level + 1):
        ids = " ".join(f"v{i}_{k};" for k in range(d.m(i)))
        lines.append(f"  {{ rank=same; {ids} }}")
    for i in range(max_level):
        a = d.matrix(i)
        for l in range(d.m(i)):
            for k in range(len(a)):
                for _ in range(a[k][l]):
                    lines.append(f"  v{i}_{l} -> v{i + 1}_{k};")
    lines.append("}")
    return "\n".join(lines) + "\n"
