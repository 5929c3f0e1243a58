"""Invariant bld: building isolated lc singularities at torus-fixed points."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactcore import DomainError, LinearProgram, box_points, dot, lp_solve
from .fan import (
    Cone, Fan, cartier_index, linear_equiv, local_character, nef_ample_degree,
    restrict_divisor, star_fan,
)
from .logpair import ToricLogPair
from .mld import NEG_INF, mld_generic
from .reports import FAIL, INCONCLUSIVE, PASS, ConjectureReport

LABEL = "invariant bld >= bld"


def _as_cone(fan: Fan, x: Sequence[int]) -> Cone:
    x = tuple(sorted(x))
    if x not in fan.cone_set or len(x) != fan.dim:
        raise DomainError("x must be a full-dimensional cone (a torus-fixed point)")
    return x


def _require_ample(fan: Fan, H) -> None:
    if not fan.is_complete:
        raise DomainError("polarizations live on complete fans")
    if not nef_ample_degree(fan, H).ample:
        raise DomainError("H is not ample")


def degrees_through(fan: Fan, H, x: Sequence[int]) -> list[tuple[Cone, Fraction]]:
    """``deg_W(H|_W)`` for every invariant ``W = V(tau)`` through ``V(x)``."""
    x = _as_cone(fan, x)
    out = []
    for k in range(len(x) + 1):
        for tau in itertools.combinations(x, k):
            if len(tau) == fan.dim:
                out.append((tau, Fraction(1)))
                continue
            if not tau:
                out.append((tau, nef_ample_degree(fan, H).degree))
                continue
            st = star_fan(fan, tau)
            h = restrict_divisor(fan, H, tau, st)
            out.append((tau, nef_ample_degree(st.fan, h).degree))
    return out


def normalized_at(fan: Fan, H, x: Sequence[int]) -> tuple[bool, list[tuple[Cone, Fraction]]]:
    """``H`` is normalized at ``x`` iff every invariant ``W`` through ``x`` has degree >= 1."""
    _require_ample(fan, H)
    ledger = degrees_through(fan, H, x)
    return all(d >= 1 for _, d in ledger), ledger


@dataclass
class BldResult:
    value: Fraction | None
    divisor: tuple[Fraction, ...] | None
    character: tuple[Fraction, ...] | None
    box_point: tuple[int, ...] | None
    mld_at_x: Fraction | float
    quadratic_bound: Fraction
    verdict: str
    label: str = LABEL
    family: list = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.value is not None


def _witness_lp(pair: ToricLogPair, H, sigma: Cone, zero_at: Sequence[tuple[Fraction, ...]],
                nonneg_rays: Sequence[int], boundary) -> tuple[Fraction, tuple, tuple] | None:
    """min c s.t. D = cH + div(chi^m) >= 0, A_{B+D} >= 0 on the rays of sigma and
    ``A_{B+D} = 0`` at the given points (coordinates in the rays of sigma)."""
    fan = pair.fan
    n = fan.dim
    # variables: c, m_1..m_n
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for i, u in enumerate(fan.rays):
        A_ub.append((-Fraction(H[i]),) + tuple(-Fraction(x) for x in u))
        b_ub.append(Fraction(0))
    for i in nonneg_rays:
        u = fan.rays[i]
        A_ub.append((Fraction(H[i]),) + tuple(Fraction(x) for x in u))
        b_ub.append(1 - boundary[i])
    for coords in zero_at:
        row = [Fraction(0)] * (n + 1)
        rhs = Fraction(0)
        for ci, i in zip(coords, sigma):
            row[0] += ci * H[i]
            for t in range(n):
                row[1 + t] += ci * fan.rays[i][t]
            rhs += ci * (1 - boundary[i])
        A_eq.append(tuple(row))
        b_eq.append(rhs)
    prog = LinearProgram(tuple([Fraction(1)] + [Fraction(0)] * n), tuple(A_ub), tuple(b_ub),
                         tuple(A_eq), tuple(b_eq), nonneg=(True,) + (False,) * n)
    res = lp_solve(prog)
    if not res.optimal:
        return None
    c, m = res.x[0], res.x[1:]
    D = tuple(c * H[i] + dot(m, u) for i, u in enumerate(fan.rays))
    return c, D, m


def bld_invariant(pair: ToricLogPair, H, x: Sequence[int]) -> BldResult:
    """Least ``c`` such that an effective invariant ``D ~ cH`` makes ``a(x; B + D) = 0``.

    One LP per relative-interior box point ``w`` of ``x``: ``A_{B+D}(w) = 0``
    and ``A_{B+D} >= 0`` on the rays of ``x``; the minimum over the family is
    returned with its witness.  Restricting to invariant ``D`` gives an upper
    bound for the true invariant.
    """
    fan = pair.fan
    sigma = _as_cone(fan, x)
    H = tuple(Fraction(h) for h in H)
    _require_ample(fan, H)
    a_x, _ = mld_generic(pair, sigma)
    if a_x == NEG_INF or a_x < 0:
        raise DomainError("the pair is not lc at x")
    n = fan.dim
    bound = Fraction(n * (n + 1), 2)
    best = None
    family = []
    for w in box_points([fan.rays[i] for i in sigma], relative_interior=True):
        cone_w, co = fan.locate(w)
        full = [Fraction(0)] * len(sigma)
        for i, c in zip(cone_w, co):
            full[sigma.index(i)] = c
        sol = _witness_lp(pair, H, sigma, [tuple(full)], sigma, pair.coeffs)
        family.append((w, sol[0] if sol else None))
        if sol is not None and (best is None or sol[0] < best[0][0]):
            best = (sol, w)
    if best is None:
        return BldResult(None, None, None, None, a_x, bound, INCONCLUSIVE, family=family)
    (c, D, m), w = best
    verdict = PASS if c <= a_x else INCONCLUSIVE
    return BldResult(c, D, m, w, a_x, bound, verdict, family=family)


def verify_bld_witness(pair: ToricLogPair, H, x: Sequence[int], result: BldResult) -> bool:
    """Re-check ``D >= 0``, ``D ~ c H`` and ``a(x; B + D) = 0`` independently."""
    if result.value is None:
        return False
    D = result.divisor
    if any(d < 0 for d in D):
        return False
    cH = tuple(result.value * Fraction(h) for h in H)
    if linear_equiv(pair.fan, D, cH) is None:
        return False
    shifted = pair.with_coeffs(tuple(b + d for b, d in zip(pair.coeffs, D)))
    val, _ = mld_generic(shifted, tuple(sorted(x)))
    return val == 0


@dataclass
class RecursionStep:
    center: Cone
    c: Fraction
    divisor: tuple[Fraction, ...]
    slack: Fraction


@dataclass
class RecursionTrace:
    steps: list[RecursionStep]
    total: Fraction
    complete: bool
    quadratic_bound: Fraction

    @property
    def margin(self) -> Fraction:
        return self.quadratic_bound - self.total


def kollar_recursion(pair: ToricLogPair, H, x: Sequence[int]) -> RecursionTrace:
    """Cut the minimal lc center through ``x`` down step by step with invariant divisors.

    The current minimal center is ``V(tau)`` with ``tau`` the rays of ``x``
    where ``A_{B_k}`` vanishes.  Each step minimizes ``c`` over the ways of
    adding one more vanishing ray, keeps the others non-negative, and stops
    once every ray of ``x`` vanishes (the center is the point).
    """
    fan = pair.fan
    sigma = _as_cone(fan, x)
    H = tuple(Fraction(h) for h in H)
    ok, _ = normalized_at(fan, H, sigma)
    if not ok:
        raise DomainError("H is not normalized at x")
    n = fan.dim
    boundary = list(pair.coeffs)
    if any(boundary[i] > 1 for i in sigma):
        raise DomainError("the pair is not lc at x")
    steps: list[RecursionStep] = []
    zero = {i for i in sigma if boundary[i] == 1}
    while len(zero) < len(sigma):
        dim_before = n - len(zero)
        best = None
        for r in sigma:
            if r in zero:
                continue
            pts = []
            for z in sorted(zero | {r}):
                e = [Fraction(0)] * len(sigma)
                e[sigma.index(z)] = Fraction(1)
                pts.append(tuple(e))
            sol = _witness_lp(pair.with_coeffs(boundary), H, sigma, pts, sigma, boundary)
            if sol is not None and (best is None or sol[0] < best[0][0]):
                best = (sol, r)
        if best is None:
            return RecursionTrace(steps, sum((s.c for s in steps), Fraction(0)), False,
                                  Fraction(n * (n + 1), 2))
        (c, D, _), _ = best
        boundary = [b + d for b, d in zip(boundary, D)]
        zero = {i for i in sigma if boundary[i] == 1}
        center = tuple(sorted(zero))
        steps.append(RecursionStep(center, c, D, dim_before - c))
    total = sum((s.c for s in steps), Fraction(0))
    return RecursionTrace(steps, total, True, Fraction(n * (n + 1), 2))


def check_generation_at(fan: Fan, L, x: Sequence[int]) -> bool:
    """Toric basepoint-freeness of the Cartier divisor ``L`` at the fixed point ``V(x)``."""
    sigma = _as_cone(fan, x)
    L = tuple(Fraction(v) for v in L)
    if cartier_index(fan, L) != 1:
        raise DomainError("L is not Cartier")
    m = local_character(fan, L, sigma)
    # sections chi^p with <p,u> >= -l_u; the one not vanishing at x has <p,u> = -l_u on sigma
    p = tuple(-v for v in m)
    return all(dot(p, u) >= -L[i] for i, u in enumerate(fan.rays))


def check_fujita(fan: Fan, L, m: int) -> ConjectureReport:
    """``K + mL`` is generated by global sections for ample Cartier ``L`` and ``m > dim``."""
    if m <= fan.dim:
        raise DomainError("the statement concerns m > dim X")
    if not fan.is_smooth():
        raise DomainError("the generation check is implemented for smooth complete fans")
    L = tuple(Fraction(v) for v in L)
    if cartier_index(fan, L) != 1:
        raise DomainError("L is not Cartier")
    _require_ample(fan, L)
    D = tuple(-1 + m * v for v in L)
    bad = [list(c) for c in fan.maximal if not check_generation_at(fan, D, c)]
    cert = {"m": m, "divisor": D, "points_checked": len(fan.maximal)}
    if bad:
        return ConjectureReport("fujita", FAIL, witness={"points": bad}, certificates=cert)
    return ConjectureReport("fujita", PASS, certificates=cert)


def check_quadratic_bound(pair: ToricLogPair, H, x: Sequence[int]) -> ConjectureReport:
    """``c* < n(n+1)/2`` at a point where ``H`` is normalized and the pair is lc, off the LCS."""
    fan = pair.fan
    sigma = _as_cone(fan, x)
    ok, ledger = normalized_at(fan, H, sigma)
    n = fan.dim
    cert = {"degrees": [(list(t), d) for t, d in ledger]}
    if not ok:
        return ConjectureReport("quadratic_bound", INCONCLUSIVE, certificates=cert,
                                notes=["H is not normalized at x"])
    res = bld_invariant(pair, H, sigma)
    cert.update({"c": res.value, "bound": res.quadratic_bound, "a_x": res.mld_at_x})
    if res.value is None:
        return ConjectureReport("quadratic_bound", INCONCLUSIVE, certificates=cert,
                                notes=["no invariant witness"])
    if n == 1:
        verdict = PASS if res.value <= res.quadratic_bound else FAIL
        note = ["dimension one: only the non-strict bound is asserted"]
        return ConjectureReport("quadratic_bound", verdict, certificates=cert, notes=note)
    verdict = PASS if res.value < res.quadratic_bound else FAIL
    return ConjectureReport("quadratic_bound", verdict, certificates=cert,
                            witness={} if verdict == PASS else {"c": res.value})
