"""Local rigidity of end spaces and the order of their isometry groups.

A collapsed class *duplicates* when two of its children have rooted
isometric subtrees; swapping them is a nontrivial ball isometry.  The end
space is locally rigid iff duplication happens at only finitely many
levels, and then the isometry group is the finite iterated wreath product
accumulated over those levels.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from math import factorial

from .trees import Collapse, ProceduralTree, TreeSystem, collapse

LOCALLY_RIGID = "LocallyRigid"
NOT_LOCALLY_RIGID = "NotLocallyRigid"
UNKNOWN = "UnknownBeyondDepth"


@dataclass(frozen=True)
class Witness:
    level: int
    cls: int
    path: tuple[int, ...]
    child_class: int
    multiplicity: int


@dataclass(frozen=True)
class RigidityVerdict:
    status: str
    epsilon_level: int | None = None
    witness: Witness | None = None
    depth: int | None = None

    @property
    def rigid(self) -> bool:
        return self.status == LOCALLY_RIGID

    def epsilon(self) -> str:
        return "unknown" if self.epsilon_level is None else f"e^-{self.epsilon_level}"


def _duplicating(tree: TreeSystem, slot: int) -> list[tuple[int, int, int]]:
    out = []
    for c, children in enumerate(tree.slots[slot]):
        for k, mult in sorted(Counter(children).items()):
            if mult >= 2:
                out.append((c, k, mult))
                break
    return out


def _path_to(col: Collapse, level: int, target: int) -> tuple[int, ...]:
    """Some vertex path in the original tree whose collapsed class is ``target``."""
    src = col.source
    reach = {0: ()}
    for lv in range(level):
        nxt: dict[int, tuple[int, ...]] = {}
        for cls, path in reach.items():
            for pos, child in enumerate(src.level(lv)[cls]):
                nxt.setdefault(child, path + (pos,))
        reach = nxt
    for cls, path in sorted(reach.items(), key=lambda kv: kv[1]):
        if col.class_of(level, cls) == target:
            return path
    raise AssertionError("collapsed class has no vertex")  # pragma: no cover


def is_locally_rigid(ts) -> RigidityVerdict:
    """Decide local rigidity from the collapsed class structure."""
    if isinstance(ts, ProceduralTree):
        return RigidityVerdict(UNKNOWN, depth=0)
    col = collapse(ts)
    tree = col.tree
    last_dup = None
    for s in range(len(tree.prefix)):
        if _duplicating(tree, s):
            last_dup = s
    if tree.periodic:
        for s in range(len(tree.prefix), len(tree.slots)):
            dups = _duplicating(tree, s)
            if dups:
                c, k, mult = dups[0]
                return RigidityVerdict(
                    NOT_LOCALLY_RIGID,
                    witness=Witness(s, c, _path_to(col, s, c), k, mult),
                )
        eps = 0 if last_dup is None else last_dup + 1
        return RigidityVerdict(LOCALLY_RIGID, eps)
    eps = 0 if last_dup is None else last_dup + 1
    return RigidityVerdict(UNKNOWN, eps, depth=tree.depth)


@dataclass(frozen=True)
class Finite:
    order: int


@dataclass(frozen=True)
class Infinite:
    pass


@dataclass(frozen=True)
class UnknownOrder:
    depth: int | None


def isometry_group_order(ts):
    """``|Isom(end(T, v))|`` by the wreath-product recursion, or Infinite."""
    verdict = is_locally_rigid(ts)
    if verdict.status == NOT_LOCALLY_RIGID:
        return Infinite()
    if verdict.status == UNKNOWN:
        return UnknownOrder(verdict.depth)
    tree = collapse(ts).tree
    eps = verdict.epsilon_level
    orders = [1] * len(tree.level(eps))
    for lv in range(eps - 1, -1, -1):
        cur = []
        for children in tree.level(lv):
            o = 1
            for k, mult in Counter(children).items():
                o *= orders[k] ** mult * factorial(mult)
            cur.append(o)
        orders = cur
    return Finite(orders[0])
