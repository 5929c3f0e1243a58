import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lpk.catalog import affine_space, p1_times_p1, projection, projective_space
from lpk.exactcore import DomainError, primitive
from lpk.fan import FanMorphism, identity_morphism, pullback_divisor, star_subdivision
from lpk.fuzz import _BASES, _blowup, _finite_cover, random_fibration
from lpk.logpair import ToricLogPair, crepant_subdivide
from lpk.pushforward import (
    RelativeTrivialityError, birational_base_change, discriminant, finite_base_change,
    inverse_adjunction_bounds, moduli_part,
)
from lpk.reports import FAIL, PASS
from oracles import fiber_min_oracle

A1 = affine_space(1).fan
A2 = affine_space(2).fan
MULT = FanMorphism(((1, 1),), A2, A1)
SQUARE = FanMorphism(((2,),), A1, A1)
HALF_3Q = affine_space(2, (Fraction(1, 2), Fraction(3, 4)))
BASES = ("A1", "P1", "A2", "P1xP1", "P2")


def test_identity_discriminant_is_the_boundary():
    pair = affine_space(2, (Fraction(1, 3), Fraction(-2, 5)))
    assert discriminant(pair, identity_morphism(A2)).coeffs == pair.coeffs
    assert moduli_part(pair, identity_morphism(A2)).divisor == (0, 0)


def test_multiplication_map_example():
    d = discriminant(HALF_3Q, MULT)
    assert d.coeffs == (Fraction(3, 4),)
    assert d.certificates[0].a == Fraction(1, 4)
    assert d.certificates[0].vertex == (0, 1)
    assert d.N == 1


@pytest.mark.parametrize("b", [Fraction(1, 2), Fraction(1, 3), Fraction(-1, 4), Fraction(5, 6)])
def test_square_cover_recovers_the_base_boundary(b):
    pair = affine_space(1, (2 * b - 1,))
    d = discriminant(pair, SQUARE)
    assert d.coeffs == (b,) and d.N == 2
    assert moduli_part(pair, SQUARE).divisor == (0,)


def test_not_lc_over_generic_point_names_the_ray():
    A2h = affine_space(2).fan
    f = FanMorphism(((1, 0),), A2h, A1)
    with pytest.raises(DomainError, match="horizontal ray 1"):
        discriminant(affine_space(2, (0, 2)), f)


def test_moduli_part_on_p1xp1_with_two_sections():
    Q = p1_times_p1((0, 1, 0, 1))
    f = projection(Q.fan, projective_space(1).fan, (0,))
    mp = moduli_part(Q, f)
    assert mp.discriminant.coeffs == (0, 0)
    assert mp.divisor == (0, 0) and mp.nef is True


def test_moduli_part_reports_relative_nontriviality():
    Q = p1_times_p1((0, 0, 0, 0))
    f = projection(Q.fan, projective_space(1).fan, (0,))
    with pytest.raises(RelativeTrivialityError):
        moduli_part(Q, f)


def test_lp_value_matches_fiber_lattice_scan():
    rng = random.Random(21)
    for _ in range(25):
        inst = random_fibration(rng, BASES, -12, 18)
        p, f = inst.pair, inst.morphism
        d = discriminant(p, f)
        for q, u in enumerate(f.target.rays):
            assert d.certificates[q].a == fiber_min_oracle(
                p.fan.rays, p.fan.maximal, p.coeffs, f.matrix, u, height=20)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_additivity_under_pullback(seed):
    rng = random.Random(seed)
    inst = random_fibration(rng, BASES, -12, 18)
    p, f = inst.pair, inst.morphism
    D = tuple(Fraction(rng.randint(-12, 12), 12) for _ in f.target.rays)
    shifted = p.with_coeffs(tuple(b + e for b, e in zip(p.coeffs, pullback_divisor(f, D))))
    assert discriminant(shifted, f).coeffs == tuple(
        b + e for b, e in zip(discriminant(p, f).coeffs, D))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_discriminant_invariant_under_crepant_subdivision(seed):
    rng = random.Random(seed)
    inst = random_fibration(rng, BASES, -12, 18)
    p, f = inst.pair, inst.morphism
    before = discriminant(p, f).coeffs
    cone = rng.choice(p.fan.maximal)
    v = tuple(sum(p.fan.rays[i][t] for i in cone) for t in range(p.fan.dim))
    up = crepant_subdivide(p, primitive(v))
    assert discriminant(up, FanMorphism(f.matrix, up.fan, f.target)).coeffs == before


def test_effective_boundary_gives_effective_discriminant():
    rng = random.Random(4)
    for _ in range(40):
        inst = random_fibration(rng, BASES, 0, 12)
        assert all(b >= 0 for b in discriminant(inst.pair, inst.morphism).coeffs) or \
            any(b >= 1 for b in inst.pair.coeffs)


def test_semistability_readout():
    rng = random.Random(8)
    for _ in range(20):
        inst = random_fibration(rng, BASES, -12, 18)
        d = discriminant(inst.pair, inst.morphism)
        assert all((b <= 0) == (c.a >= 1) for b, c in zip(d.coeffs, d.certificates))


def test_finite_base_change_examples():
    rep = finite_base_change(HALF_3Q, MULT, SQUARE)
    assert rep.verdict == PASS
    row = rep.certificates["ledger"][0]
    assert row["a_Q"] == Fraction(1, 4) and row["a_Q'"] == Fraction(1, 2)
    cube = FanMorphism(((3,),), A1, A1)
    rep = finite_base_change(affine_space(1), SQUARE, cube)
    assert rep.verdict == PASS and rep.certificates["ledger"][0]["w"] == 3
    assert finite_base_change(HALF_3Q, MULT, identity_morphism(A1)).verdict == PASS


def test_finite_base_change_on_random_fibrations():
    rng = random.Random(12)
    for _ in range(25):
        inst = random_fibration(rng, BASES, -12, 18)
        sigma = _finite_cover(rng, inst.morphism.target)
        assert finite_base_change(inst.pair, inst.morphism, sigma).verdict == PASS


def test_finite_base_change_rejects_birational_maps():
    bl = star_subdivision(A2, (1, 1))
    with pytest.raises(DomainError):
        finite_base_change(affine_space(2), identity_morphism(A2), FanMorphism(((1, 0), (0, 1)), bl, A2))


def test_birational_base_change_examples():
    bl = star_subdivision(A2, (1, 1))
    sigma = FanMorphism(((1, 0), (0, 1)), bl, A2)
    r = birational_base_change(affine_space(2, (Fraction(1, 3), Fraction(1, 5))), identity_morphism(A2), sigma)
    assert r.report.verdict == PASS and all(s == 0 for s in r.sigma_divisor)
    A3 = affine_space(3).fan
    g = FanMorphism(((1, 0, 1), (0, 1, 1)), A3, A2)
    r = birational_base_change(affine_space(3, (Fraction(1, 2), 0, 0)), g, sigma)
    assert r.sigma_divisor == (0, 0, Fraction(1, 2))
    # the fiber over the generic point is not complete, so the conjecture does not apply
    assert r.report.verdict != FAIL
    assert r.report.certificates["exceptional"] and r.report.certificates["effective"]


def test_birational_base_change_sigma_is_exceptional():
    rng = random.Random(31)
    for _ in range(20):
        inst = random_fibration(rng, ("A2", "P1xP1", "P2"), 0, 12)
        sigma = _blowup(rng, inst.morphism.target)
        r = birational_base_change(inst.pair, inst.morphism, sigma)
        assert r.report.certificates["exceptional"]


def test_birational_base_change_on_crepant_models():
    # crepant models of a base pair satisfy the hypotheses; Sigma must vanish
    rng = random.Random(32)
    for name in ("A2", "P1xP1", "P2") * 5:
        Y = _BASES[name]()
        base = ToricLogPair(Y, tuple(Fraction(rng.randint(-12, 12), 12) for _ in Y.rays))
        X = base
        for _ in range(rng.randint(1, 3)):
            c = rng.choice([c for c in X.fan.maximal])
            a, b = rng.randint(1, 3), rng.randint(1, 3)
            X = crepant_subdivide(X, primitive([a * X.fan.rays[c[0]][t] + b * X.fan.rays[c[1]][t]
                                                for t in range(2)]))
        f = FanMorphism(((1, 0), (0, 1)), X.fan, Y)
        r = birational_base_change(X, f, _blowup(rng, Y))
        c = r.report.certificates
        assert c["klt_over_generic_point"] and c["relatively_trivial"]
        assert c["effective"] and c["exceptional"]
        assert r.report.verdict == PASS


def test_inverse_adjunction_examples():
    b = inverse_adjunction_bounds(HALF_3Q, MULT, [(0,)])
    assert (b.lower, b.mid, b.upper, b.N) == (Fraction(1, 4),) * 3 + (1,)
    b = inverse_adjunction_bounds(affine_space(1), SQUARE, [(0,)])
    assert (b.lower, b.mid, b.upper, b.N) == (Fraction(1, 2), Fraction(1, 2), 1, 2)
    b = inverse_adjunction_bounds(HALF_3Q, identity_morphism(A2), [(0, 1)])
    assert b.lower == b.mid == b.upper and b.N == 1


def test_inverse_adjunction_bounds_on_random_fibrations():
    rng = random.Random(41)
    for _ in range(40):
        inst = random_fibration(rng, BASES, -12, 12)
        Y = inst.morphism.target
        Z = rng.choice([c for c in Y.cones if c])
        assert inverse_adjunction_bounds(inst.pair, inst.morphism, [Z]).holds
