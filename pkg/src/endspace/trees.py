"""Finitely described rooted trees and their canonical subtree classes.

A tree is given level by level.  Each level lists *classes*; a class is the
tuple of its children's class indices on the next level, in a fixed order
(child *positions* index into that tuple).  Vertices of the tree are the
paths of positions from the root, and the class of a vertex records the
shape of the subtree hanging below it.

Eventually periodic systems repeat ``cycle`` forever after ``prefix``;
explicit systems are finite truncations whose last level is a frontier of
leaves.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import gcd
from typing import Callable, Iterator, Sequence

from .errors import NotPeriodicError, StructureError

Level = tuple[tuple[int, ...], ...]


def _as_level(classes) -> Level:
    return tuple(tuple(int(c) for c in children) for children in classes)


@dataclass(frozen=True)
class TreeSystem:
    prefix: tuple[Level, ...]
    cycle: tuple[Level, ...] = ()
    labels: tuple | None = field(default=None, compare=False)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(_as_level(lv) for lv in self.prefix))
        object.__setattr__(self, "cycle", tuple(_as_level(lv) for lv in self.cycle))
        if not self.prefix and not self.cycle:
            raise StructureError("tree system has no levels")

    @property
    def kind(self) -> str:
        return "eventually_periodic" if self.cycle else "explicit"

    @property
    def periodic(self) -> bool:
        return bool(self.cycle)

    @property
    def depth(self) -> int | None:
        """Deepest level of an explicit truncation; ``None`` when infinite."""
        return None if self.cycle else len(self.prefix) - 1

    @property
    def slots(self) -> tuple[Level, ...]:
        return self.prefix + self.cycle

    def slot(self, level: int) -> int:
        if level < len(self.prefix):
            return level
        if not self.cycle:
            raise IndexError(f"level {level} beyond explicit depth {self.depth}")
        return len(self.prefix) + (level - len(self.prefix)) % len(self.cycle)

    def next_slot(self, s: int) -> int | None:
        total = len(self.prefix) + len(self.cycle)
        if s + 1 < total:
            return s + 1
        return len(self.prefix) if self.cycle else None

    def level(self, i: int) -> Level:
        return self.slots[self.slot(i)]

    def label(self, level: int, cls: int, pos: int):
        if self.labels is None:
            return pos
        return self.labels[self.slot(level)][cls][pos]

    def unfold(self, depth: int) -> "TreeSystem":
        levels = [self.level(i) for i in range(depth)]
        levels.append(tuple(() for _ in self.level(depth)))
        labels = None
        if self.labels is not None:
            labels = tuple(self.labels[self.slot(i)] for i in range(depth)) + (
                tuple(() for _ in self.level(depth)),
            )
        return TreeSystem(tuple(levels), (), labels, self.name)

    def to_json(self) -> dict:
        def lv(level):
            return {"classes": [{"children": list(c)} for c in level]}

        return {
            "kind": self.kind,
            "prefix": [lv(x) for x in self.prefix],
            "cycle": [lv(x) for x in self.cycle],
        }


@dataclass(frozen=True)
class ProceduralTree:
    """Level descriptors produced by a rule; must be unfolded before exact work."""

    rule: str
    params: tuple
    level_fn: Callable[[int], Level] = field(compare=False, repr=False)
    name: str = ""

    kind = "procedural"
    periodic = False

    def level(self, i: int) -> Level:
        return self.level_fn(i)

    def unfold(self, depth: int) -> TreeSystem:
        levels = [self.level(i) for i in range(depth)]
        levels.append(tuple(() for _ in self.level(depth)))
        return TreeSystem(tuple(levels), (), None, self.name)


@dataclass(frozen=True)
class Vertex:
    level: int
    path: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(self.path))
        if len(self.path) != self.level:
            raise StructureError("vertex path length must equal its level")

    @classmethod
    def of(cls, path: Sequence[int]) -> "Vertex":
        return cls(len(path), tuple(path))


@dataclass(frozen=True)
class EndPoint:
    """An eventually periodic ray: ``prefix`` then ``cycle`` repeated forever."""

    prefix: tuple[int, ...]
    cycle: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if not self.cycle:
            raise StructureError("end point cycle must be nonempty")

    def __getitem__(self, i: int) -> int:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def head(self, n: int) -> tuple[int, ...]:
        return tuple(self[i] for i in range(n))

    def normalized(self) -> "EndPoint":
        """Shortest prefix and primitive cycle denoting the same sequence."""
        cyc = self.cycle
        n = len(cyc)
        p = next(p for p in range(1, n + 1) if n % p == 0 and cyc == cyc[:p] * (n // p))
        pre, cyc = list(self.prefix), list(cyc[:p])
        while pre and pre[-1] == cyc[-1]:
            cyc = [pre.pop()] + cyc[:-1]
        return EndPoint(tuple(pre), tuple(cyc))

    def to_json(self) -> dict:
        return {"prefix": list(self.prefix), "cycle": list(self.cycle)}


# -- constructors -------------------------------------------------------------

BUILTINS = ("cantor", "fibonacci", "sturmian", "regular", "ary", "ended", "branching")


def builtin(name: str, n: int | Sequence[int] | None = None) -> TreeSystem:
    """Named tree families.

    ``regular``, ``ary`` and ``ended`` take ``n >= 1``; ``branching`` takes a
    list of per-level branch counts repeated forever (e.g. ``[2, 3]``).
    """
    if name == "cantor":
        return replace(builtin("ary", 2), name="cantor")
    if name == "fibonacci":
        return TreeSystem(
            (((0, 1),),), (((0, 1), (0,)),),
            labels=(((0, 1),), ((0, 1), (0,))), name="fibonacci",
        )
    if name == "sturmian":
        return TreeSystem(
            (((0, 1),),), (((0, 1), (1,)),),
            labels=(((0, 1),), ((0, 1), (1,))), name="sturmian",
        )
    if name == "branching":
        counts = list(n or [])
        if not counts or any(int(b) < 1 for b in counts):
            raise StructureError("branching needs a nonempty list of counts >= 1")
        return TreeSystem((), tuple((((0,) * int(b)),) for b in counts),
                          name=f"branching{counts}")
    if name not in BUILTINS:
        raise StructureError(f"unknown builtin tree {name!r}; choose from {', '.join(BUILTINS)}")
    if n is None or isinstance(n, (list, tuple)) or int(n) < 1:
        raise StructureError(f"builtin {name!r} needs an integer parameter n >= 1")
    n = int(n)
    if name == "ary":
        return TreeSystem((), (((0,) * n,),), name=f"ary({n})")
    if name == "regular":
        return TreeSystem((((0,) * (n + 1),),), (((0,) * n,),), name=f"regular({n})")
    # ended
    return TreeSystem((((0,) * n,),), (((0,),),), name=f"ended({n})")


def from_sft(matrix: Sequence[Sequence[int]]) -> TreeSystem:
    """Tree of a one-sided subshift of finite type with 0/1 transition matrix."""
    n = len(matrix)
    if n == 0 or any(len(row) != n for row in matrix):
        raise StructureError("transition matrix must be square and nonempty")
    if any(x not in (0, 1) for row in matrix for x in row):
        raise StructureError("transition matrix entries must be 0 or 1")
    for i, row in enumerate(matrix):
        if not any(row):
            raise StructureError(
                f"symbol {i} has no successor; the end space would not be geodesically complete"
            )
    root = (tuple(range(n)),)
    body = tuple(tuple(j for j in range(n) if matrix[i][j]) for i in range(n))
    return TreeSystem((root,), (body,), labels=(root, body), name="sft")


def _cfrac_level(i: int, a: int) -> tuple[Level, tuple]:
    # class 0 = free (digit may range over 0..a), class 1 = forced (digit 0)
    if i == 0:
        return (((0,) * a + (1,)),), ((tuple(range(a + 1))),)
    return ((0,) * a + (1,), (0,)), (tuple(range(a + 1)), (0,))


def _check_coeffs(coeffs: Sequence[int], first_index: int) -> None:
    for k, a in enumerate(coeffs):
        i = first_index + k
        if int(a) < (0 if i == 0 else 1):
            raise StructureError(f"continued fraction coefficient a_{i} = {a} out of range")


def from_continued_fraction(
    prefix: Sequence[int] | Callable[[int], int], cycle: Sequence[int] = ()
) -> TreeSystem | ProceduralTree:
    """Tree whose end space is the digit space of ``[a_0; a_1, a_2, ...]``.

    Digits satisfy ``0 <= x_i <= a_i`` and ``x_i = a_i`` forces ``x_{i+1} = 0``.
    ``prefix``/``cycle`` give an eventually periodic coefficient sequence (an
    empty cycle means a tail of ones); a callable ``i -> a_i`` yields a
    procedural system.
    """
    if callable(prefix):
        fn = prefix

        def level_fn(i: int) -> Level:
            a = int(fn(i))
            _check_coeffs([a], i)
            return _cfrac_level(i, a)[0]

        return ProceduralTree("cfrac", (), level_fn, name="cfrac")
    prefix = [int(a) for a in prefix]
    cycle = [int(a) for a in cycle] or [1]
    if not prefix:
        prefix = [cycle[0]]
        cycle = cycle[1:] + cycle[:1]
    _check_coeffs(prefix, 0)
    _check_coeffs(cycle, len(prefix))
    levels, labels = [], []
    for i, a in enumerate(prefix):
        lv, lb = _cfrac_level(i, a)
        levels.append(lv)
        labels.append(lb)
    cyc, cyc_labels = [], []
    for k, a in enumerate(cycle):
        lv, lb = _cfrac_level(len(prefix) + k, a)
        cyc.append(lv)
        cyc_labels.append(lb)
    return TreeSystem(
        tuple(levels), tuple(cyc), labels=tuple(labels) + tuple(cyc_labels),
        name=f"cfrac({prefix}+{cycle}*)",
    )


def from_json(doc: dict) -> TreeSystem | ProceduralTree:
    try:
        kind = doc["kind"]
    except (KeyError, TypeError) as exc:
        raise StructureError("tree document needs a 'kind'") from exc
    try:
        if kind == "sft":
            return from_sft(doc["matrix"])
        if kind == "cfrac":
            return from_continued_fraction(doc.get("prefix", []), doc.get("cycle", []))
        if kind == "builtin":
            return builtin(doc["name"], doc.get("n"))
        if kind in ("eventually_periodic", "explicit"):

            def levels(key):
                return tuple(
                    tuple(tuple(c["children"]) for c in lv["classes"]) for lv in doc.get(key, [])
                )

            prefix, cycle = levels("prefix"), levels("cycle")
            if kind == "eventually_periodic" and not cycle:
                raise StructureError("eventually periodic tree needs a nonempty cycle")
            if kind == "explicit" and cycle:
                raise StructureError("explicit tree cannot have a cycle")
            return TreeSystem(prefix, cycle, name=doc.get("name", ""))
    except (KeyError, TypeError) as exc:
        raise StructureError(f"malformed {kind} tree document: {exc}") from exc
    raise StructureError(f"unknown tree kind {kind!r}")


# -- validation and traversal ----------------------------------------------------


@dataclass(frozen=True)
class TreeReport:
    ok: bool
    problems: tuple[str, ...] = ()


def validate(ts: TreeSystem) -> TreeReport:
    problems = []
    slots = ts.slots
    if len(slots[0]) != 1:
        problems.append(f"level 0 has {len(slots[0])} classes; the root level needs exactly one")
    for s, lv in enumerate(slots):
        nxt = ts.next_slot(s)
        width = len(slots[nxt]) if nxt is not None else 0
        for c, children in enumerate(lv):
            if nxt is None:
                if children:
                    problems.append(f"frontier level {s} class {c} lists children")
                continue
            if not children:
                problems.append(
                    f"level {s} class {c} has no children (geodesic completeness fails)"
                )
            for k in children:
                if not 0 <= k < width:
                    problems.append(f"level {s} class {c} child index {k} out of range 0..{width - 1}")
        if not lv:
            problems.append(f"level {s} has no classes")
    if ts.labels is not None:
        if len(ts.labels) != len(slots):
            problems.append("labels do not match the level structure")
        else:
            for s, (lv, lb) in enumerate(zip(slots, ts.labels)):
                if len(lv) != len(lb) or any(len(a) != len(b) for a, b in zip(lv, lb)):
                    problems.append(f"labels at level {s} do not match the children")
                elif any(len(set(b)) != len(b) for b in lb):
                    problems.append(f"labels at level {s} repeat within a class")
    return TreeReport(not problems, tuple(problems))


def require_valid(ts) -> None:
    if isinstance(ts, ProceduralTree):
        return
    report = validate(ts)
    if not report.ok:
        raise StructureError("; ".join(report.problems))


def class_of_path(ts, path: Sequence[int]) -> int:
    cls = 0
    for lv, pos in enumerate(path):
        children = ts.level(lv)[cls]
        if not 0 <= pos < len(children):
            raise StructureError(f"position {pos} invalid at level {lv}")
        cls = children[pos]
    return cls


def vertices(ts, level: int) -> list[tuple[tuple[int, ...], int]]:
    """All ``(path, class)`` pairs at ``level``, in lexicographic path order."""
    frontier = [((), 0)]
    for lv in range(level):
        children_of = ts.level(lv)
        frontier = [
            (path + (pos,), child)
            for path, cls in frontier
            for pos, child in enumerate(children_of[cls])
        ]
    return frontier


def level_profile(ts, max_level: int) -> list[int]:
    """Vertex counts ``|V_0|, ..., |V_max_level|`` via class-count vectors."""
    counts = {0: 1}
    out = [1]
    for lv in range(max_level):
        nxt: dict[int, int] = {}
        classes = ts.level(lv)
        for cls, k in counts.items():
            for child in classes[cls]:
                nxt[child] = nxt.get(child, 0) + k
        counts = nxt
        out.append(sum(counts.values()))
    return out


def walk(ts, point: EndPoint) -> Iterator[tuple[int, int, int]]:
    """Yield ``(level, class, position)`` along a ray, checking legality."""
    cls, lv = 0, 0
    while True:
        pos = point[lv]
        children = ts.level(lv)[cls]
        if not 0 <= pos < len(children):
            raise StructureError(f"end point leaves the tree at level {lv}")
        yield lv, cls, pos
        cls = children[pos]
        lv += 1


def _ray_state_period(ts: TreeSystem, point: EndPoint) -> tuple[int, int]:
    """Bounds ``(start, period)`` after which (slot, class, point-phase) repeats."""
    if not ts.periodic:
        raise NotPeriodicError("eventually periodic tree required")
    start = max(len(ts.prefix), len(point.prefix))
    period = len(ts.cycle) * len(point.cycle) // gcd(len(ts.cycle), len(point.cycle))
    return start, period


def check_endpoint(ts: TreeSystem, point: EndPoint) -> None:
    """Raise unless ``point`` is a legal ray of ``ts`` at every level."""
    start, period = _ray_state_period(ts, point)
    seen = set()
    for lv, cls, pos in walk(ts, point):
        if lv >= start:
            key = ((lv - start) % period, cls)
            if key in seen:
                return
            seen.add(key)


def label_sequence(ts: TreeSystem, point: EndPoint) -> EndPoint:
    """The edge labels read along ``point``, as an eventually periodic sequence."""
    start, period = _ray_state_period(ts, point)
    labels: list = []
    first: dict = {}
    for lv, cls, pos in walk(ts, point):
        if lv >= start and (lv - start) % period == 0:
            if cls in first:
                j = first[cls]
                return EndPoint(tuple(labels[:j]), tuple(labels[j:])).normalized()
            first[cls] = lv
        labels.append(ts.label(lv, cls, pos))
    raise AssertionError("unreachable")  # pragma: no cover


def path_from_labels(ts: TreeSystem, labels: Sequence, start_level: int = 0, start_cls: int = 0):
    """Positions spelling ``labels`` from a given vertex class, or ``None`` if illegal."""
    cls, out = start_cls, []
    for k, lab in enumerate(labels):
        lv = start_level + k
        row = ts.labels[ts.slot(lv)][cls] if ts.labels is not None else range(len(ts.level(lv)[cls]))
        row = tuple(row)
        if lab not in row:
            return None
        pos = row.index(lab)
        out.append(pos)
        cls = ts.level(lv)[cls][pos]
    return tuple(out)


# -- bisimulation collapse -----------------------------------------------------------


def _nodes(ts: TreeSystem):
    nodes = [(s, c) for s, lv in enumerate(ts.slots) for c in range(len(lv))]

    def children(node):
        s, c = node
        nxt = ts.next_slot(s)
        if nxt is None:
            return []
        return [(nxt, k) for k in ts.slots[s][c]]

    return nodes, children


def bisimulation(ts: TreeSystem, labelled: bool = False) -> dict[tuple[int, int], int]:
    """Coarsest partition of (slot, class) nodes with matching child multisets.

    Starting from one block and splitting by the multiset of child blocks
    reaches the greatest fixed point: two nodes share a block iff their
    subtrees are rooted isometric (or, with ``labelled``, isomorphic as
    edge-labelled trees).
    """
    nodes, children = _nodes(ts)
    block = {node: 0 for node in nodes}
    count = 1
    while True:
        sigs = {}
        for node in nodes:
            s, c = node
            kids = children(node)
            if labelled:
                labs = ts.labels[s][c] if ts.labels is not None else range(len(kids))
                body = tuple(sorted((lab, block[k]) for lab, k in zip(labs, kids)))
            else:
                body = tuple(sorted(block[k] for k in kids))
            sigs[node] = (block[node], body)
        ids = {sig: i for i, sig in enumerate(sorted(set(sigs.values())))}
        new = {node: ids[sigs[node]] for node in nodes}
        if len(ids) == count:
            return new
        block, count = new, len(ids)


def _canonical_keys(ts: TreeSystem, block: dict) -> dict:
    """Representation-independent ordering key per block.

    Rank at depth k orders depth-k truncated shapes: more children first,
    then by the sorted ranks of the children at depth k-1.  Keys are the
    sequences of ranks, extended until they separate every block.
    """
    nodes, children = _nodes(ts)
    nblocks = len(set(block.values()))
    rank = {node: 0 for node in nodes}
    keys: dict = {node: () for node in nodes}
    for _ in range(len(nodes) + 2):
        sig = {n: (-len(children(n)), tuple(sorted(rank[k] for k in children(n)))) for n in nodes}
        order = {s: i for i, s in enumerate(sorted(set(sig.values())))}
        rank = {n: order[sig[n]] for n in nodes}
        keys = {n: keys[n] + (rank[n],) for n in nodes}
        if len(set(keys.values())) >= nblocks:
            break
    out = {}
    for n in nodes:
        out.setdefault(block[n], keys[n])
    return out


def _minimize(levels: list, cycle_start: int | None, extra: list) -> tuple:
    """Shortest prefix/cycle representation of an eventually periodic level list."""
    if cycle_start is None:
        return list(levels), [], list(extra), []
    pre, cyc = list(levels[:cycle_start]), list(levels[cycle_start:])
    epre, ecyc = list(extra[:cycle_start]), list(extra[cycle_start:])
    n = len(cyc)
    for p in range(1, n + 1):
        if n % p == 0 and all(cyc[i] == cyc[i % p] for i in range(n)):
            cyc, ecyc = cyc[:p], ecyc[:p]
            break
    while pre and pre[-1] == cyc[-1]:
        cyc = [pre.pop()] + cyc[:-1]
        ecyc = [epre.pop()] + ecyc[:-1]
    return pre, cyc, epre, ecyc


@dataclass(frozen=True)
class Collapse:
    """Canonical collapsed system plus the map from original classes."""

    tree: TreeSystem
    source: TreeSystem = field(repr=False)
    _block: dict = field(repr=False, compare=False)
    _level_blocks: tuple = field(repr=False, compare=False)

    def block_of(self, level: int, cls: int) -> int:
        return self._block[(self.source.slot(level), cls)]

    def class_of(self, level: int, cls: int) -> int:
        """Collapsed class index at ``level`` of an original class."""
        blocks = self._level_blocks[self.tree.slot(level)]
        return blocks.index(self.block_of(level, cls))

    def vertex_class(self, path: Sequence[int]) -> int:
        return self.class_of(len(path), class_of_path(self.source, path))


def collapse(ts) -> Collapse:
    """Merge rooted-isometric classes level by level, trim unreachable ones.

    The result orders classes canonically, so two descriptions of the same
    tree collapse to equal systems; collapse is idempotent.
    """
    if isinstance(ts, ProceduralTree):
        raise NotPeriodicError(
            "procedural tree has no periodicity certificate; unfold it to a finite depth first"
        )
    require_valid(ts)
    block = bisimulation(ts)
    keys = _canonical_keys(ts, block)

    # Blocks present in each slot, canonically ordered.
    slot_blocks = []
    for s, lv in enumerate(ts.slots):
        bs = sorted({block[(s, c)] for c in range(len(lv))}, key=lambda b: keys[b])
        slot_blocks.append(bs)

    def child_blocks(s: int, b: int) -> list[int]:
        c = next(c for c in range(len(ts.slots[s])) if block[(s, c)] == b)
        nxt = ts.next_slot(s)
        return sorted((block[(nxt, k)] for k in ts.slots[s][c]), key=lambda x: keys[x])

    # Unroll reachability: the reachable block set per level is eventually periodic.
    states: list[tuple[int, tuple[int, ...]]] = []
    index: dict = {}
    s, reach = 0, (block[(0, 0)],)
    cycle_start = None
    while True:
        if (s, reach) in index:
            cycle_start = index[(s, reach)]
            break
        index[(s, reach)] = len(states)
        states.append((s, reach))
        nxt = ts.next_slot(s)
        if nxt is None:
            break
        kids = {k for b in reach for k in child_blocks(s, b)}
        s, reach = nxt, tuple(sorted(kids, key=lambda x: keys[x]))

    levels = []
    for i, (s, reach) in enumerate(states):
        if i + 1 < len(states):
            nxt_reach = states[i + 1][1]
        elif cycle_start is not None:
            nxt_reach = states[cycle_start][1]
        else:
            nxt_reach = None
        if nxt_reach is None:
            levels.append(tuple(() for _ in reach))
        else:
            levels.append(
                tuple(tuple(nxt_reach.index(k) for k in child_blocks(s, b)) for b in reach)
            )
    pre, cyc, bpre, bcyc = _minimize(levels, cycle_start, [r for _, r in states])
    tree = TreeSystem(tuple(pre), tuple(cyc), name=ts.name)
    return Collapse(tree, ts, block, tuple(bpre) + tuple(bcyc))
