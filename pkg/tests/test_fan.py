import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lpk.catalog import affine_space, hirzebruch, p1_times_p1, projective_space
from lpk.exactcore import DomainError, primitive
from lpk.fan import (
    Fan, FanMorphism, cartier_index, class_group, class_of, compose, identity_morphism,
    linear_equiv, nef_ample_degree, pullback_divisor, restrict_divisor, star_fan,
    star_subdivision, validate_fan,
)
from lpk.fuzz import random_fan
from oracles import polytope_degree

A1_CONE = Fan.from_cones(2, [(0, 1), (2, -1)], [(0, 1)])


def test_validate_fan_examples():
    assert validate_fan(affine_space(2).fan) == []
    p1 = projective_space(1).fan
    assert validate_fan(p1) == [] and p1.is_complete
    bad = Fan.from_cones(2, [(1, 0), (0, 1), (1, 1)], [(0, 1), (0, 2)])
    problems = validate_fan(bad)
    assert problems and "[0, 1]" in problems[0] and "[0, 2]" in problems[0]


def test_fan_rejects_bad_input():
    with pytest.raises(DomainError):
        Fan.from_cones(2, [(2, 4)], [(0,)])
    with pytest.raises(DomainError):
        Fan.from_cones(2, [(1, 0), (-1, 0)], [(0, 1)])


def test_star_subdivision_examples():
    A2 = affine_space(2).fan
    blown = star_subdivision(A2, (1, 1))
    assert set(blown.maximal) == {(0, 2), (1, 2)}
    assert star_subdivision(A2, (1, 0)) == A2
    sub = star_subdivision(A1_CONE, (1, 0))
    assert all(sub.multiplicity(c) == 1 for c in sub.maximal)


def test_star_subdivision_preserves_support():
    rng = random.Random(11)
    for _ in range(30):
        fan = random_fan(rng, rng.choice([2, 3]))
        for _ in range(10):
            v = tuple(rng.randint(-3, 3) for _ in range(fan.dim))
            if not any(v):
                continue
            v = primitive(v)
            if not fan.contains(v) or fan.ray_index(v) is not None:
                continue
            new = star_subdivision(fan, v)
            assert validate_fan(new) == []
            for _ in range(20):
                w = tuple(rng.randint(-5, 5) for _ in range(fan.dim))
                assert new.contains(w) == fan.contains(w)
            break


def test_cartier_examples():
    assert cartier_index(A1_CONE, (1, 0)) == 2
    assert cartier_index(A1_CONE, (-1, -1)) == 1
    P2 = projective_space(2).fan
    assert cartier_index(P2, (1, 2, 0)) == 1


def test_nef_ample_degree_examples():
    d = nef_ample_degree(projective_space(1).fan, (1, 0))
    assert d.nef and d.ample and d.degree == 1
    assert nef_ample_degree(projective_space(2).fan, (0, 0, 1)).degree == 1
    assert nef_ample_degree(p1_times_p1().fan, (1, 1, 0, 0)).degree == 2
    triv = nef_ample_degree(projective_space(2).fan, (0, 0, 0))
    assert triv.nef and not triv.ample and triv.degree == 0


@pytest.mark.parametrize("name,fan", [
    ("P2", projective_space(2).fan), ("P3", projective_space(3).fan),
    ("F1", hirzebruch(1).fan), ("F3", hirzebruch(3).fan), ("P1xP1", p1_times_p1().fan),
])
def test_degree_against_convex_hull(name, fan):
    rng = random.Random(name)
    for _ in range(15):
        d = tuple(Fraction(rng.randint(0, 6), rng.randint(1, 2)) for _ in fan.rays)
        got = nef_ample_degree(fan, d)
        if got.nef:
            assert abs(float(got.degree) - polytope_degree(fan.rays, d)) < 1e-6


def test_degree_homogeneity():
    fan = hirzebruch(2).fan
    d = (1, 1, 1, 2)
    base = nef_ample_degree(fan, d).degree
    for c in (2, 3, Fraction(1, 2)):
        assert nef_ample_degree(fan, tuple(c * x for x in d)).degree == c ** 2 * base


def test_linear_equivalence_examples():
    P1 = projective_space(1).fan
    assert linear_equiv(P1, (1, 0), (1, 0)) == (0,)
    assert linear_equiv(P1, (1, 0), (0, 1)) is not None
    Q = p1_times_p1().fan
    fiber, section = (1, 0, 0, 0), (0, 1, 0, 0)
    assert linear_equiv(Q, fiber, section) is None
    assert class_group(Q) == (2, [])
    assert class_group(A1_CONE) == (0, [2])
    assert class_of(Q, (1, 0, 0, 0)) == class_of(Q, (0, 0, 1, 0))


def test_pullback_examples_and_functoriality():
    A1 = affine_space(1).fan
    sq = FanMorphism(((2,),), A1, A1)
    assert pullback_divisor(sq, (1,)) == (2,)
    A2 = affine_space(2).fan
    mult = FanMorphism(((1, 1),), A2, A1)
    assert pullback_divisor(mult, (1,)) == (1, 1)
    ident = identity_morphism(A2)
    assert pullback_divisor(ident, (Fraction(1, 3), 2)) == (Fraction(1, 3), 2)
    h = FanMorphism(((3,),), A1, A1)
    q = (Fraction(2, 5),)
    assert pullback_divisor(compose(h, mult), q) == pullback_divisor(mult, pullback_divisor(h, q))


def test_star_fan_and_restriction():
    P2 = projective_space(2).fan
    st_ = star_fan(P2, (2,))
    assert len(st_.fan.rays) == 2 and st_.fan.is_complete
    H = (0, 0, 1)
    h = restrict_divisor(P2, H, (2,), st_)
    assert nef_ample_degree(st_.fan, h).degree == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 4), st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_pullback_class_depends_only_on_class(a, d):
    """For the contraction F_a -> P^1, pulling back linearly equivalent divisors gives equivalent ones."""
    Fa = hirzebruch(a).fan
    P1 = projective_space(1).fan
    f = FanMorphism(((1, 0),), Fa, P1)
    q1 = (Fraction(d[0]), Fraction(d[1]))
    q2 = (q1[0] + d[2], q1[1] - d[2])
    assert linear_equiv(Fa, pullback_divisor(f, q1), pullback_divisor(f, q2)) is not None
