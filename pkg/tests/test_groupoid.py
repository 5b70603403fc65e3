import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from endspace.errors import PreconditionError, StructureError
from endspace.groupoid import (
    Germ,
    GermGroupoid,
    Level,
    PathPair,
    Zero,
    class_counts,
    compose_paths,
    count_ball_isometries,
    distance,
    germ_exists,
    identity_germ,
    inverse,
    isometry_witness,
    tail_equivalent,
    verify_witness,
)
from endspace.trees import EndPoint, Vertex, builtin, from_sft

V = Vertex.of
FULL2 = from_sft([[1, 1], [1, 1]])
EX122 = from_sft([[1, 1, 1], [1, 1, 1], [1, 0, 0]])


def test_distance_examples():
    fib = builtin("fibonacci")
    x, y = EndPoint((), (0,)), EndPoint((0, 1), (0,))
    assert distance(fib, x, y) == Level(1)
    assert distance(fib, x, x) == Zero()
    assert distance(FULL2, EndPoint((), (0,)), EndPoint((1,), (0,))) == Level(0)
    assert distance(FULL2, EndPoint((0,), (1, 0)), EndPoint((), (0, 1))) == Zero()
    with pytest.raises(StructureError):
        distance(fib, x, EndPoint((1,), (1,)))


def _random_point(rng, n=2):
    return EndPoint(tuple(rng.randrange(n) for _ in range(rng.randint(0, 3))),
                    tuple(rng.randrange(n) for _ in range(rng.randint(1, 3))))


def _key(d):
    return float("inf") if d == Zero() else d.t0


@settings(max_examples=100)
@given(st.integers(0, 10**6))
def test_strong_triangle(seed):
    rng = random.Random(seed)
    x, y, z = (_random_point(rng) for _ in range(3))
    # larger first-disagreement index means smaller distance
    assert _key(distance(FULL2, x, y)) >= min(_key(distance(FULL2, x, z)), _key(distance(FULL2, z, y)))


def test_germ_exists_examples():
    fib = builtin("fibonacci")
    ok, g = germ_exists(fib, V((0, 0)), V((1, 0)))
    assert ok and g == Germ(V((0, 0)), V((1, 0)))
    assert germ_exists(fib, V((0, 0)), V((0, 1))) == (False, None)
    ok, g = germ_exists(EX122, V((1,)), V((0,)))
    assert ok and g is None  # not locally rigid, so no unique germ


def test_compose_examples():
    gg = GermGroupoid(builtin("fibonacci"))
    a, b = V((0, 0)), V((1, 0))
    g = gg.germ(a, b)
    assert gg.compose(identity_germ(b), g) == g
    assert inverse(inverse(g)) == g
    assert gg.compose(inverse(g), g) == identity_germ(a)
    assert gg.compose(gg.germ(b, a), g) == Germ(a, a)
    with pytest.raises(PreconditionError):
        gg.compose(gg.germ(V((0, 1)), V((0, 1))), g)


def test_similarity_germs_compose_with_shift():
    gg = GermGroupoid(builtin("fibonacci"))
    # the 0-class recurs at every level: root ball ≅ ball at (0,)
    g1 = gg.germ(V(()), V((0,)))
    g2 = gg.germ(V((0,)), V((0, 0)))
    c = gg.compose(g2, g1)
    assert c.shift == g1.shift + g2.shift == -2
    assert c == Germ(V(()), V((0, 0)))


def test_enumerate_counts():
    gg = GermGroupoid(builtin("fibonacci"))
    assert len(gg.enumerate_germs(2)) == 5
    assert len(GermGroupoid(builtin("ended", 2)).enumerate_germs(1)) == 4
    with pytest.raises(PreconditionError):
        GermGroupoid(builtin("ended", 2)).enumerate_germs(0)
    assert len(GermGroupoid(from_sft([[0, 1], [1, 0]])).enumerate_germs(3)) == 4
    # distinct classes one vertex each: identity germs only
    assert [g.source == g.target for g in gg.enumerate_germs(1)] == [True, True]


def test_non_rigid_rejected():
    with pytest.raises(PreconditionError):
        GermGroupoid(builtin("cantor"))


def test_kappa_examples():
    gg = GermGroupoid(builtin("fibonacci"))
    v = V((0, 1))
    pp = gg.kappa_star(identity_germ(v))
    assert pp.range == pp.source
    g = gg.germ(V((0, 0)), V((1, 0)))
    pp = gg.kappa_star(g)
    assert pp.range != pp.source and pp.range[-1][2] == pp.source[-1][2]
    assert gg.kappa_star_inv(pp) == g


def test_path_pair_invariants():
    with pytest.raises(StructureError):
        PathPair(((0, 0, 0, 0),), ())
    with pytest.raises(StructureError):
        PathPair(((0, 0, 0, 0),), ((0, 0, 1, 0),))


@pytest.mark.parametrize("name", ["fibonacci", "sturmian"])
def test_groupoid_axioms_and_kappa_homomorphism(name):
    ts = builtin(name)
    gg = GermGroupoid(ts)
    for level in range(4):
        germs = gg.enumerate_germs(level)
        assert len(germs) == sum(c * c for c in class_counts(ts, level).values())
        pps = {gg.kappa_star(g) for g in germs}
        assert len(pps) == len(germs)
        for g in germs:
            assert gg.kappa_star_inv(gg.kappa_star(g)) == g
            assert gg.kappa_star(inverse(g)) == PathPair(gg.kappa_star(g).source,
                                                         gg.kappa_star(g).range)
        for g1, g2 in product(germs, repeat=2):
            if g1.target != g2.source:
                continue
            c = gg.compose(g2, g1)
            assert c in germs
            assert gg.kappa_star(c) == compose_paths(gg.kappa_star(g2), gg.kappa_star(g1))


def test_compose_across_levels_associative():
    gg = GermGroupoid(builtin("fibonacci"))
    germs = gg.enumerate_germs(1) + gg.enumerate_germs(2) + gg.enumerate_germs(3)
    rng = random.Random(1)
    for _ in range(300):
        g1, g2, g3 = (rng.choice(germs) for _ in range(3))
        try:
            left = gg.compose(g3, gg.compose(g2, g1))
            right = gg.compose(gg.compose(g3, g2), g1)
        except PreconditionError:
            continue
        assert left == right
        pl = compose_paths(gg.kappa_star(g3), compose_paths(gg.kappa_star(g2), gg.kappa_star(g1)))
        assert gg.kappa_star(left) == pl


@pytest.mark.parametrize("name", ["fibonacci", "sturmian"])
def test_brute_force_uniqueness(name):
    ts = builtin(name)
    gg = GermGroupoid(ts)
    for level in range(3):
        for g in gg.enumerate_germs(level):
            d = 6 - level
            assert count_ball_isometries(ts, g.source.path, g.target.path, d, d - 1) == 1


def test_tail_equivalence_examples():
    x = EndPoint((), (0,))
    assert tail_equivalent(FULL2, x, x) == 0
    assert tail_equivalent(FULL2, x, EndPoint((1,), (0,))) == 1
    assert tail_equivalent(FULL2, EndPoint((), (0, 1)), EndPoint((), (1, 0))) is None
    w = isometry_witness(FULL2, x, EndPoint((1,), (0,)))
    assert (w.level, w.source, w.target) == (1, (0,), (1,))
    with pytest.raises(PreconditionError):
        isometry_witness(FULL2, EndPoint((), (0, 1)), EndPoint((), (1, 0)))


def test_identity_witness():
    x = EndPoint((1, 0), (1,))
    w = isometry_witness(FULL2, x, x)
    assert w.level == 0 and verify_witness(FULL2, w, x, x, 8)


def test_tail_equivalence_implies_germ():
    rng = random.Random(8)
    checked = 0
    for _ in range(200):
        tail = _random_point(rng, 3)
        x = EndPoint(tuple(rng.randrange(3) for _ in range(3)) + tail.prefix, tail.cycle)
        y = EndPoint(tuple(rng.randrange(3) for _ in range(3)) + tail.prefix, tail.cycle)
        try:
            for p in (x, y):
                distance(EX122, p, p)
        except StructureError:
            continue
        n = tail_equivalent(EX122, x, y)
        assert n is not None and n <= 3
        checked += 1
        w = isometry_witness(EX122, x, y)
        assert w.level <= n + 1
        ok, _ = germ_exists(EX122, V(x.head(w.level)), V(y.head(w.level)))
        assert ok and verify_witness(EX122, w, x, y, w.level + 4)
    assert checked >= 10


def test_germ_without_tail_equivalence():
    x, y = EndPoint((), (0,)), EndPoint((), (1,))
    assert germ_exists(EX122, V((0,)), V((1,)))[0]
    assert tail_equivalent(EX122, x, y) is None
