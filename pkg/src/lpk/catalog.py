"""Standard toric models used by the CLI defaults, the fuzzer and the tests."""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

from .exactcore import DomainError, identity, is_primitive
from .fan import Fan, FanMorphism, nef_ample_degree
from .logpair import ToricLogPair


def affine_space(n: int, coeffs: Sequence | None = None) -> ToricLogPair:
    rays = identity(n)
    return ToricLogPair.of(n, rays, [tuple(range(n))], coeffs)


def projective_space(n: int, coeffs: Sequence | None = None) -> ToricLogPair:
    rays = [tuple(r) for r in identity(n)] + [tuple([-1] * n)]
    cones = [c for c in itertools.combinations(range(n + 1), n)]
    return ToricLogPair.of(n, rays, cones, coeffs)


def hirzebruch(a: int, coeffs: Sequence | None = None) -> ToricLogPair:
    """``F_a`` with rays ``(1,0), (0,1), (-1,a), (0,-1)``."""
    rays = [(1, 0), (0, 1), (-1, a), (0, -1)]
    cones = [(0, 1), (1, 2), (2, 3), (0, 3)]
    return ToricLogPair.of(2, rays, cones, coeffs)


def p1_times_p1(coeffs: Sequence | None = None) -> ToricLogPair:
    return hirzebruch(0, coeffs)


def cyclic_quotient(m: int, k: int, coeffs: Sequence | None = None) -> ToricLogPair:
    """``1/m (1, k)``: the cone spanned by ``(0,1)`` and ``(m,-k)``, gcd(m,k) = 1."""
    if m < 1:
        raise DomainError("m must be positive")
    if m > 1 and not is_primitive((m, -k)):
        raise DomainError("gcd(m, k) must be 1")
    if m == 1:
        return affine_space(2, coeffs)
    return ToricLogPair.of(2, [(0, 1), (m, -k)], [(0, 1)], coeffs)


def simplicial_cone(rays: Sequence[Sequence[int]], coeffs: Sequence | None = None) -> ToricLogPair:
    n = len(rays[0])
    return ToricLogPair.of(n, rays, [tuple(range(len(rays)))], coeffs)


def projection(source: Fan, target: Fan, coords: Sequence[int]) -> FanMorphism:
    """The coordinate projection ``N_source -> N_target`` keeping ``coords``."""
    M = tuple(tuple(1 if j == c else 0 for j in range(source.dim)) for c in coords)
    return FanMorphism(M, source, target)


def scaling(fan: Fan, k: int) -> FanMorphism:
    """``k * Id``; a finite self-cover of degree ``k^n`` of the same fan."""
    M = tuple(tuple(k if i == j else 0 for j in range(fan.dim)) for i in range(fan.dim))
    return FanMorphism(M, fan, fan)


def fujita_catalog() -> dict[str, Fan]:
    fans = {"P1": projective_space(1).fan, "P2": projective_space(2).fan,
            "P3": projective_space(3).fan, "P1xP1": p1_times_p1().fan}
    for a in range(5):
        fans[f"F{a}"] = hirzebruch(a).fan
    return fans


def ample_divisors(fan: Fan, lo: int = 0, hi: int = 3) -> list[tuple[Fraction, ...]]:
    """Ample invariant Cartier divisors with integer coefficients in ``[lo, hi]``."""
    out = []
    for d in itertools.product(range(lo, hi + 1), repeat=len(fan.rays)):
        d = tuple(Fraction(x) for x in d)
        if nef_ample_degree(fan, d).ample:
            out.append(d)
    return out
