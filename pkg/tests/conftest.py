import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings

from endspace.trees import TreeSystem
from endspace.ultrametric import FiniteUltrametricSpace

GOLDEN = Path(__file__).parent / "golden"


def random_ultrametric(rng: random.Random, n: int) -> FiniteUltrametricSpace:
    """Agglomerative merges at nondecreasing rational heights."""
    clusters = [[i] for i in range(n)]
    dist = [[Fraction(0)] * n for _ in range(n)]
    h = Fraction(0)
    while len(clusters) > 1:
        if h == 0 or rng.random() < 0.6:
            h += Fraction(rng.randint(1, 4), rng.randint(1, 6))
        a, b = rng.sample(range(len(clusters)), 2)
        for i in clusters[a]:
            for j in clusters[b]:
                dist[i][j] = dist[j][i] = h
        merged = clusters[a] + clusters[b]
        clusters = [c for k, c in enumerate(clusters) if k not in (a, b)] + [merged]
    return FiniteUltrametricSpace.from_matrix([f"p{i}" for i in range(n)], dist)


def random_tree(rng: random.Random, prefix_len: int = 2, cycle_len: int = 2,
                width: int = 3, branch: int = 3) -> TreeSystem:
    """Random valid eventually periodic system (level 0 has one class)."""
    sizes = [1] + [rng.randint(1, width) for _ in range(prefix_len + cycle_len - 1)]
    levels = []
    total = prefix_len + cycle_len
    for i in range(total):
        nxt = sizes[i + 1] if i + 1 < total else sizes[prefix_len]
        levels.append(tuple(
            tuple(rng.randrange(nxt) for _ in range(rng.randint(1, branch)))
            for _ in range(sizes[i])
        ))
    return TreeSystem(tuple(levels[:prefix_len]), tuple(levels[prefix_len:]))


@pytest.fixture
def rng():
    return random.Random(20240611)


settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")
