"""Finite ultrametric spaces with exact rational distances."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .errors import NotUltrametricError, PreconditionError, StructureError
from .trees import EndPoint, TreeSystem


@dataclass(frozen=True)
class FiniteUltrametricSpace:
    points: tuple
    dist: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.points)
        if len(self.dist) != n or any(len(row) != n for row in self.dist):
            raise StructureError(f"distance matrix must be {n}x{n}")
        for i in range(n):
            if self.dist[i][i] != 0:
                raise StructureError(f"nonzero diagonal entry at {self.points[i]!r}")
            for j in range(i + 1, n):
                if self.dist[i][j] != self.dist[j][i]:
                    raise StructureError(
                        f"asymmetric distance between {self.points[i]!r} and {self.points[j]!r}"
                    )
                if self.dist[i][j] <= 0:
                    raise StructureError(
                        f"distinct points {self.points[i]!r}, {self.points[j]!r} at distance "
                        f"{self.dist[i][j]}"
                    )

    @classmethod
    def from_matrix(cls, points: Sequence, dist: Sequence[Sequence]) -> "FiniteUltrametricSpace":
        return cls(tuple(points), tuple(tuple(Fraction(x) for x in row) for row in dist))

    @classmethod
    def from_json(cls, doc: dict) -> "FiniteUltrametricSpace":
        try:
            points = doc["points"]
            rows = doc["dist"]
        except (KeyError, TypeError) as exc:
            raise StructureError("expected {'points': [...], 'dist': [[...]]}") from exc
        try:
            return cls.from_matrix(points, [[Fraction(str(x)) for x in row] for row in rows])
        except (ValueError, ZeroDivisionError) as exc:
            raise StructureError(f"bad rational in distance matrix: {exc}") from exc

    def to_json(self) -> dict:
        return {"points": list(self.points), "dist": [[str(x) for x in row] for row in self.dist]}

    def __len__(self):
        return len(self.points)

    def d(self, i: int, j: int) -> Fraction:
        return self.dist[i][j]

    def index(self, label) -> int:
        return self.points.index(label)

    def distances(self) -> list[Fraction]:
        """Distinct nonzero distances, largest first."""
        n = len(self.points)
        return sorted({self.dist[i][j] for i in range(n) for j in range(i + 1, n)}, reverse=True)

    def ball(self, center: int, radius) -> frozenset[int]:
        return frozenset(j for j in range(len(self.points)) if self.dist[center][j] <= radius)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[tuple[int, int, int], ...] = ()


def validate_ultrametric(space: FiniteUltrametricSpace) -> ValidationReport:
    """Check the strong triangle inequality on every triple.

    A violation ``(i, j, k)`` means ``d(i, j) > max(d(i, k), d(k, j))``.
    Structural defects are rejected when the space is constructed.
    """
    n = len(space)
    bad = []
    for i, j in combinations(range(n), 2):
        for k in range(n):
            if k in (i, j):
                continue
            if space.d(i, j) > max(space.d(i, k), space.d(k, j)):
                bad.append((i, j, k))
    return ValidationReport(not bad, tuple(bad))


def require_ultrametric(space: FiniteUltrametricSpace) -> None:
    report = validate_ultrametric(space)
    if not report.ok:
        i, j, k = report.violations[0]
        p = space.points
        raise NotUltrametricError(
            f"strong triangle inequality fails for ({p[i]!r}, {p[j]!r}) via {p[k]!r}"
        )


def isb_apex(space: FiniteUltrametricSpace, x: int, y: int, z: int) -> int:
    """Apex of the isosceles-with-short-base triangle on x, y, z.

    Equilateral triangles return the smallest index.
    """
    require_ultrametric(space)
    if len({x, y, z}) != 3:
        raise PreconditionError("isb_apex needs three distinct points")
    for i in sorted((x, y, z)):
        j, k = [t for t in (x, y, z) if t != i]
        if space.d(i, j) == space.d(i, k) and space.d(j, k) <= space.d(i, j):
            return i
    raise NotUltrametricError("triangle is not isosceles with a short base")


@dataclass(frozen=True)
class BallIsometry:
    center: int
    radius: Fraction
    mapping: dict = field(hash=False)


def is_isometry(space: FiniteUltrametricSpace, perm: Sequence[int]) -> bool:
    n = len(space)
    if sorted(perm) != list(range(n)):
        return False
    return all(
        space.d(i, j) == space.d(perm[i], perm[j]) for i, j in combinations(range(n), 2)
    )


def extend_ball_isometry(space: FiniteUltrametricSpace, iso: BallIsometry) -> tuple[int, ...]:
    """Extend a self-isometry of a closed ball by the identity off the ball."""
    require_ultrametric(space)
    dom = space.ball(iso.center, iso.radius)
    if set(iso.mapping) != dom:
        raise PreconditionError("mapping domain is not the ball B(center, radius)")
    if set(iso.mapping.values()) != dom:
        raise PreconditionError(
            "mapping is not a self-map of B(center, radius); isometries between "
            "different balls need not extend"
        )
    for a, b in combinations(sorted(dom), 2):
        if space.d(a, b) != space.d(iso.mapping[a], iso.mapping[b]):
            raise PreconditionError("mapping does not preserve distances on the ball")
    perm = tuple(iso.mapping.get(i, i) for i in range(len(space)))
    if not is_isometry(space, perm):  # pragma: no cover - guaranteed by the ultrametric law
        raise AssertionError("extension failed to be an isometry")
    return perm


def isometry_group(space: FiniteUltrametricSpace) -> list[tuple[int, ...]]:
    """All distance-preserving permutations, identity first.

    Backtracking assigns images point by point, only trying targets whose
    sorted distance profile matches.
    """
    require_ultrametric(space)
    n = len(space)
    profile = [tuple(sorted(space.dist[i])) for i in range(n)]
    found: list[tuple[int, ...]] = []
    image = [-1] * n
    used = [False] * n

    def extend(i: int) -> None:
        if i == n:
            found.append(tuple(image))
            return
        for j in range(n):
            if used[j] or profile[j] != profile[i]:
                continue
            if all(space.d(i, k) == space.d(j, image[k]) for k in range(i)):
                image[i] = j
                used[j] = True
                extend(i + 1)
                used[j] = False
        image[i] = -1

    extend(0)
    return found


@dataclass(frozen=True)
class Dendrogram:
    tree: TreeSystem
    level_of_distance: dict = field(hash=False)
    leaves: tuple[EndPoint, ...] = ()

    def distance_of_level(self, level: int) -> Fraction:
        for t, lv in self.level_of_distance.items():
            if lv == level:
                return t
        raise KeyError(level)


def dendrogram(space: FiniteUltrametricSpace) -> Dendrogram:
    """Closed-ball hierarchy of a finite ultrametric space as a rooted tree.

    Level ``i`` holds the partition into closed balls of radius ``t_i``,
    where ``t_0 > t_1 > ...`` are the realized distances; below the last
    split each point continues as a single-child ray.  Two points whose
    paths first differ at index ``j`` are at distance ``t_j``.
    """
    if len(space) == 0:
        raise PreconditionError("dendrogram of an empty space")
    require_ultrametric(space)
    n = len(space)
    ts = space.distances()
    partitions: list[list[frozenset[int]]] = [[frozenset(range(n))]]
    for t in ts[1:]:
        blocks = []
        seen: set[int] = set()
        for i in range(n):
            if i not in seen:
                b = space.ball(i, t)
                blocks.append(b)
                seen |= b
        partitions.append(blocks)
    if n > 1:
        partitions.append([frozenset([i]) for i in range(n)])

    prefix = []
    for lv in range(len(partitions) - 1):
        upper, lower = partitions[lv], partitions[lv + 1]
        classes = []
        for b in upper:
            classes.append(tuple(k for k, c in enumerate(lower) if c <= b))
        prefix.append(tuple(classes))
    singles = partitions[-1]
    cycle = (tuple((k,) for k in range(len(singles))),)
    tree = TreeSystem(tuple(prefix), cycle, name="dendrogram")

    leaves = []
    for p in range(n):
        path = []
        for lv in range(len(partitions) - 1):
            parent = next(k for k, b in enumerate(partitions[lv]) if p in b)
            child = next(k for k, b in enumerate(partitions[lv + 1]) if p in b)
            path.append(prefix[lv][parent].index(child))
        leaves.append(EndPoint(tuple(path), (0,)))
    return Dendrogram(tree, {t: i for i, t in enumerate(ts)}, tuple(leaves))
