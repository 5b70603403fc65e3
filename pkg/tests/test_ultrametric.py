import random
from fractions import Fraction
from itertools import combinations, permutations

import pytest
from hypothesis import given, settings, strategies as st

from endspace.errors import NotUltrametricError, PreconditionError, StructureError
from endspace.groupoid import Level, Zero, distance
from endspace.trees import validate
from endspace.ultrametric import (
    BallIsometry,
    FiniteUltrametricSpace,
    dendrogram,
    extend_ball_isometry,
    is_isometry,
    isb_apex,
    isometry_group,
    validate_ultrametric,
)

from conftest import random_ultrametric

F = Fraction


def space(rows, names="abcd"):
    return FiniteUltrametricSpace.from_matrix(list(names[: len(rows)]), rows)


def test_isosceles_small_base_is_ok():
    s = space([[0, 1, 1], [1, 0, F(1, 3)], [1, F(1, 3), 0]])
    assert validate_ultrametric(s).ok


def test_violation_reported():
    s = space([[0, 1, F(1, 3)], [1, 0, F(1, 2)], [F(1, 3), F(1, 2), 0]])
    report = validate_ultrametric(s)
    assert not report.ok
    assert (0, 1, 2) in report.violations


def test_single_point_ok():
    assert validate_ultrametric(space([[0]])).ok


@pytest.mark.parametrize("rows", [
    [[0, 1], [2, 0]],
    [[1, 1], [1, 0]],
    [[0, 0], [0, 0]],
    [[0, 1, 1], [1, 0]],
])
def test_structural_errors(rows):
    with pytest.raises(StructureError):
        space(rows)


def test_from_json_rationals():
    s = FiniteUltrametricSpace.from_json({"points": ["x", "y"], "dist": [[0, "1/3"], ["1/3", 0]]})
    assert s.d(0, 1) == F(1, 3)
    assert FiniteUltrametricSpace.from_json(s.to_json()) == s
    with pytest.raises(StructureError):
        FiniteUltrametricSpace.from_json({"points": ["x"], "dist": [["zero"]]})


def test_isb_apex():
    assert isb_apex(space([[0, 1, 1], [1, 0, F(1, 3)], [1, F(1, 3), 0]]), 0, 1, 2) == 0
    equi = space([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    assert isb_apex(equi, 2, 0, 1) == 0
    s = space([[0, 1, F(1, 3)], [1, 0, 1], [F(1, 3), 1, 0]])
    assert isb_apex(s, 0, 1, 2) == 1
    with pytest.raises(PreconditionError):
        isb_apex(s, 0, 0, 1)


def test_isb_apex_rejects_non_ultrametric():
    bad = space([[0, 1, F(1, 3)], [1, 0, F(1, 2)], [F(1, 3), F(1, 2), 0]])
    with pytest.raises(NotUltrametricError):
        isb_apex(bad, 0, 1, 2)


def four_points():
    third = F(1, 3)
    return space([[0, third, 1, 1], [third, 0, 1, 1], [1, 1, 0, 1], [1, 1, 1, 0]])


def test_extend_identity_and_swap():
    s = four_points()
    ident = extend_ball_isometry(s, BallIsometry(0, F(1, 2), {0: 0, 1: 1}))
    assert ident == (0, 1, 2, 3)
    swap = extend_ball_isometry(s, BallIsometry(0, F(1, 2), {0: 1, 1: 0}))
    assert swap == (1, 0, 2, 3)
    assert is_isometry(s, swap)


def test_extend_rejects_cross_ball_map():
    s = four_points()
    with pytest.raises(PreconditionError):
        extend_ball_isometry(s, BallIsometry(0, F(1, 2), {0: 2, 1: 1}))


def test_isometry_group_examples():
    equi = space([[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    assert sorted(isometry_group(equi)) == sorted(permutations(range(3)))
    assert len(isometry_group(space([[0, F(1, 2)], [F(1, 2), 0]]))) == 2
    s = space([[0, F(1, 3), 1], [F(1, 3), 0, 1], [1, 1, 0]])
    assert isometry_group(s) == [(0, 1, 2), (1, 0, 2)]


def test_dendrogram_three_points():
    s = space([[0, F(1, 9), 1], [F(1, 9), 0, 1], [1, 1, 0]])
    den = dendrogram(s)
    assert den.level_of_distance == {F(1): 0, F(1, 9): 1}
    # root splits {a,b} | {c}; {a,b} splits one level down
    assert [len(c) for c in den.tree.level(0)] == [2]
    assert validate(den.tree).ok
    assert den.leaves[0].prefix[0] == den.leaves[1].prefix[0] != den.leaves[2].prefix[0]


def test_dendrogram_single_point_is_ray():
    den = dendrogram(space([[0]]))
    assert den.tree.prefix == () and den.tree.cycle == (((0,),),)


def test_dendrogram_equidistant_is_ended_shape():
    n = 4
    s = FiniteUltrametricSpace.from_matrix(range(n), [[0 if i == j else 1 for j in range(n)]
                                                      for i in range(n)])
    tree = dendrogram(s).tree
    assert tree.level(0) == ((0, 1, 2, 3),)
    assert all(len(c) == 1 for lv in range(1, 4) for c in tree.level(lv))


def test_dendrogram_round_trip_random():
    rng = random.Random(5)
    for _ in range(40):
        s = random_ultrametric(rng, rng.randint(1, 8))
        den = dendrogram(s)
        for i, j in combinations(range(len(s)), 2):
            d = distance(den.tree, den.leaves[i], den.leaves[j])
            assert isinstance(d, Level)
            assert den.distance_of_level(d.t0) == s.d(i, j)
        for i in range(len(s)):
            assert distance(den.tree, den.leaves[i], den.leaves[i]) == Zero()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 7))
def test_ball_properties(seed, n):
    s = random_ultrametric(random.Random(seed), n)
    assert validate_ultrametric(s).ok
    radii = s.distances() + [F(0)]
    balls = {s.ball(x, r) for x in range(n) for r in radii}
    for b1, b2 in combinations(balls, 2):
        assert not (b1 & b2) or b1 <= b2 or b2 <= b1
    for x in range(n):
        for r in radii:
            for y in s.ball(x, r):
                assert s.ball(y, r) == s.ball(x, r)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 6))
def test_isometry_group_is_a_group(seed, n):
    s = random_ultrametric(random.Random(seed), n)
    group = isometry_group(s)
    assert group[0] == tuple(range(n))
    members = set(group)
    for g in group:
        assert is_isometry(s, g)
        inv = tuple(sorted(range(n), key=lambda i: g[i]))
        assert inv in members
        for h in group:
            assert tuple(g[h[i]] for i in range(n)) in members
    brute = [p for p in permutations(range(n)) if is_isometry(s, p)]
    assert sorted(brute) == sorted(group)
