import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lpk.catalog import affine_space, cyclic_quotient, projective_space, simplicial_cone
from lpk.exactcore import DomainError, det
from lpk.fuzz import random_cone, random_pair
from lpk.logpair import log_discrepancy
from lpk.mld import (
    NEG_INF, check_max_mld, check_semicontinuity, mld_generic, mld_subset,
    neg_infinity_certificate, point_profile,
)
from lpk.reports import FAIL, PASS
from oracles import mld_oracle


def test_cyclic_quotient_examples():
    assert mld_generic(cyclic_quotient(3, 1), (0, 1)) == (Fraction(2, 3), (1, 0))
    assert mld_generic(affine_space(2), (0, 1))[0] == 2
    assert mld_generic(affine_space(3), (0, 1, 2))[0] == 3


def test_index_two_surface_cones_have_mld_one():
    # every 2-dim cone of index 2 is <e2, 2e1 - e2> up to GL2(Z)
    for rays in ([(0, 1), (2, -1)], [(1, 1), (1, -1)], [(1, 0), (1, 2)], [(-1, 3), (1, -1)]):
        assert abs(det([list(u) for u in rays])) == 2
        assert mld_generic(simplicial_cone(rays), (0, 1))[0] == 1


def test_mld_against_lattice_scan():
    rng = random.Random(3)
    seen = 0
    while seen < 30:
        n = rng.choice([2, 3])
        rays = random_cone(rng, n, max_index=60)
        if abs(det([list(u) for u in rays])) == 1:
            continue
        coeffs = [Fraction(rng.randint(0, 12), 12) for _ in rays]
        pair = simplicial_cone(rays, coeffs)
        val, w = mld_generic(pair, tuple(range(n)))
        assert val == mld_oracle(rays, coeffs, bound=25 if n == 2 else 12)
        assert log_discrepancy(pair, w) == val
        seen += 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_generic_mld_on_faces_against_scan(seed):
    rng = random.Random(seed)
    rays = random_cone(rng, 3, max_index=30)
    coeffs = [Fraction(rng.randint(-6, 12), 12) for _ in rays]
    pair = simplicial_cone(rays, coeffs)
    for face in ((0,), (0, 1), (1, 2)):
        val, _ = mld_generic(pair, face)
        if any(coeffs[i] > 1 for i in face):
            assert val == NEG_INF
        else:
            assert val == mld_oracle(rays, coeffs, bound=10, face=face)


def test_mld_generic_errors():
    with pytest.raises(DomainError):
        mld_generic(affine_space(2), ())
    with pytest.raises(DomainError):
        mld_generic(projective_space(2), (0, 1, 2))


def test_point_profile_examples():
    prof = point_profile(cyclic_quotient(3, 1))
    assert prof[()].point == 2
    assert prof[(0,)].point == 2 and prof[(0,)].generic == 1
    assert prof[(0, 1)].point == Fraction(2, 3)


def test_semicontinuity_counterexample_with_negative_boundary():
    rep = check_semicontinuity(affine_space(1, (-1,)))
    assert rep.verdict == FAIL
    assert rep.witness["general_value"] == 1 and rep.witness["special_value"] == 2
    assert rep.witness["general"] == [] and rep.witness["special"] == [0]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 4]))
def test_semicontinuity_and_max_mld_on_effective_pairs(seed, n):
    pair = random_pair(random.Random(seed), n, 0, 12)
    assert check_semicontinuity(pair).verdict == PASS
    assert check_max_mld(pair).verdict == PASS


def test_max_mld_examples():
    rep = check_max_mld(projective_space(2, (Fraction(1, 2), 0, 0)))
    assert rep.verdict == PASS and rep.certificates["sup"] == 2
    assert [0] not in rep.certificates["attained"]
    with pytest.raises(DomainError):
        check_max_mld(affine_space(1, (-1,)))


def test_mld_subset():
    val, (cone, w) = mld_subset(projective_space(2), [(0,)])
    assert val == 1 and cone == (0,)
    val, (cone, _) = mld_subset(cyclic_quotient(3, 1), [(0,)])
    assert val == Fraction(2, 3) and cone == (0, 1)


def test_negative_infinity_certificate_is_linear():
    pair = affine_space(3, (2, 0, Fraction(1, 2)))
    cert = neg_infinity_certificate(pair, (1,))
    assert cert.slope == -1
    assert cert.terms == tuple(k * cert.slope + cert.offset for k in (1, 2, 3))
    assert mld_subset(pair, [(1,)])[0] == -math.inf
    with pytest.raises(DomainError):
        neg_infinity_certificate(affine_space(2), (0,))
