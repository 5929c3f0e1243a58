"""Minimal log discrepancies of toric pairs and the point profile ``a(x)``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactcore import DomainError, box_points, primitive
from .fan import Cone
from .logpair import ToricLogPair, log_discrepancy
from .reports import FAIL, PASS, ConjectureReport

NEG_INF = -math.inf


def mld_generic(pair: ToricLogPair, tau: Sequence[int]) -> tuple[Fraction | float, tuple[int, ...] | None]:
    """mld at the generic point of ``V(tau)`` with a witness vector.

    ``-inf`` (witness: the offending ray) iff some ray of tau has ``b > 1``;
    otherwise the minimum of ``A`` over the primitive relative-interior box
    points of tau, the lexicographically smallest minimizer as witness.
    """
    tau = tuple(sorted(tau))
    if not tau:
        raise DomainError("mld at the generic point of X is not applicable")
    if tau not in pair.fan.cone_set:
        raise DomainError(f"{list(tau)} is not a cone of the fan")
    for i in tau:
        if pair.coeffs[i] > 1:
            return NEG_INF, pair.fan.rays[i]
    best = None
    for p in box_points([pair.fan.rays[i] for i in tau], relative_interior=True):
        q = primitive(p)
        a = log_discrepancy(pair, q)
        if best is None or (a, q) < best:
            best = (a, q)
    return best


def mld_subset(pair: ToricLogPair, cones: Sequence[Sequence[int]]) -> tuple[Fraction | float, tuple | None]:
    """mld over the invariant closed subset ``union V(tau)``.

    Minimum of :func:`mld_generic` over all nonzero cones containing one of
    the given cones.  Returns ``(value, (cone, witness))``.
    """
    if not cones:
        raise DomainError("empty subset")
    targets = [set(t) for t in cones]
    best = None
    for c in pair.fan.cones:
        if not c or not any(t <= set(c) for t in targets):
            continue
        val, w = mld_generic(pair, c)
        key = (val, c)
        if best is None or key < best[0]:
            best = (key, (val, (c, w)))
    if best is None:
        raise DomainError("no cone of the fan lies over the subset")
    return best[1]


@dataclass(frozen=True)
class StratumValue:
    generic: Fraction | float | None
    point: Fraction | float


def point_profile(pair: ToricLogPair) -> dict[Cone, StratumValue]:
    """``a(x)`` on every torus orbit ``O(tau)``: ``mld_generic(tau) + dim V(tau)``."""
    n = pair.fan.dim
    out: dict[Cone, StratumValue] = {}
    for c in pair.fan.cones:
        if not c:
            out[c] = StratumValue(None, Fraction(n))
            continue
        g, _ = mld_generic(pair, c)
        out[c] = StratumValue(g, g + (n - len(c)) if g != NEG_INF else NEG_INF)
    return out


def check_semicontinuity(pair: ToricLogPair) -> ConjectureReport:
    """Lower semicontinuity of ``a``: specializing to a smaller orbit never increases it."""
    prof = point_profile(pair)
    cones = pair.fan.cones
    checked = 0
    for t in cones:
        for s in cones:
            if len(s) > len(t) and set(t) <= set(s):
                checked += 1
                if prof[s].point > prof[t].point:
                    return ConjectureReport(
                        "semicontinuity", FAIL,
                        witness={"general": list(t), "special": list(s),
                                 "general_value": prof[t].point, "special_value": prof[s].point},
                        certificates={"comparisons": checked})
    return ConjectureReport("semicontinuity", PASS, certificates={"comparisons": checked})


def check_max_mld(pair: ToricLogPair) -> ConjectureReport:
    """``sup a(x) = dim X``, attained exactly on smooth orbits off the boundary."""
    if not pair.is_log_variety:
        raise DomainError("the maximal-mld statement concerns effective boundaries")
    n = pair.fan.dim
    prof = point_profile(pair)
    top = max(v.point for v in prof.values())
    attained = sorted(c for c, v in prof.items() if v.point == n)
    expected = sorted(c for c in pair.fan.cones
                      if pair.fan.multiplicity(c) == 1 and all(pair.coeffs[i] == 0 for i in c))
    cert = {"sup": top, "attained": [list(c) for c in attained]}
    if top != n:
        return ConjectureReport("max_mld", FAIL, witness={"sup": top, "dim": n}, certificates=cert)
    if attained != expected:
        extra = [list(c) for c in attained if c not in expected]
        missing = [list(c) for c in expected if c not in attained]
        return ConjectureReport("max_mld", FAIL, witness={"unexpected": extra, "missing": missing},
                                certificates=cert)
    return ConjectureReport("max_mld", PASS, certificates=cert)


@dataclass(frozen=True)
class NegInfCertificate:
    """``A(k u + w) = k A(u) + A(w)`` with ``A(u) < 0``, centered inside the subset."""
    ray: int
    u: tuple[int, ...]
    w: tuple[int, ...]
    cone: Cone
    slope: Fraction
    offset: Fraction
    terms: tuple[Fraction, ...]


def neg_infinity_certificate(pair: ToricLogPair, tau: Sequence[int]) -> NegInfCertificate:
    tau = tuple(sorted(tau))
    star = pair.fan.closed_star_rays(tau)
    bad = [i for i in star if pair.coeffs[i] > 1]
    if not bad:
        raise DomainError("the pair is lc near the subset; no certificate exists")
    r = bad[0]
    gamma = tuple(sorted(set(tau) | {r}))
    if gamma not in pair.fan.cone_set:
        raise DomainError("internal: star ray does not span a cone with tau")
    n = pair.fan.dim
    u = pair.fan.rays[r]
    w = tuple(sum(pair.fan.rays[i][t] for i in gamma if i != r) for t in range(n))
    slope = 1 - pair.coeffs[r]
    offset = sum((1 - pair.coeffs[i] for i in gamma if i != r), Fraction(0))
    terms = []
    for k in (1, 2, 3):
        v = tuple(k * a + b for a, b in zip(u, w))
        a = log_discrepancy(pair, v)
        if a != k * slope + offset:
            raise AssertionError("linearity of A violated")
        terms.append(a)
    return NegInfCertificate(r, u, w, gamma, slope, offset, tuple(terms))
