"""Toric log pairs, log discrepancies, lc thresholds and the LCS locus/ideal."""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactcore import DomainError, box_points, dot, inverse, is_primitive, matvec, primitive
from .fan import Cone, Fan, star_subdivision

INF = math.inf


@dataclass(frozen=True)
class ToricLogPair:
    """A simplicial fan with one boundary coefficient per ray."""
    fan: Fan
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = tuple(Fraction(x) for x in self.coeffs)
        if len(coeffs) != len(self.fan.rays):
            raise DomainError("one coefficient per ray is required")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def of(cls, dim, rays, cones, coeffs=None) -> "ToricLogPair":
        fan = Fan.from_cones(dim, rays, cones)
        return cls(fan, tuple(coeffs) if coeffs is not None else (0,) * len(fan.rays))

    @property
    def is_log_variety(self) -> bool:
        return all(b >= 0 for b in self.coeffs)

    @property
    def ray_discrepancies(self) -> tuple[Fraction, ...]:
        return tuple(1 - b for b in self.coeffs)

    def with_coeffs(self, coeffs) -> "ToricLogPair":
        return ToricLogPair(self.fan, tuple(coeffs))

    def log_discrepancy(self, v) -> Fraction:
        return log_discrepancy(self, v)


def log_discrepancy(pair: ToricLogPair, v: Sequence) -> Fraction:
    """``A(v) = sum c_i (1 - b_i)`` for ``v = sum c_i u_i`` in its cone."""
    cone, co = pair.fan.locate(v)
    return sum((c * (1 - pair.coeffs[i]) for i, c in zip(cone, co)), Fraction(0))


def crepant_subdivide(pair: ToricLogPair, v: Sequence[int]) -> ToricLogPair:
    """Star subdivision at ``v`` with the new coefficient ``1 - A(v)``."""
    v = tuple(int(x) for x in v)
    if pair.fan.ray_index(v) is not None:
        return pair
    a = log_discrepancy(pair, v)
    fan = star_subdivision(pair.fan, v)
    return ToricLogPair(fan, pair.coeffs + (1 - a,))


def _relevant_rays(pair: ToricLogPair, region: Sequence[int] | None) -> list[int]:
    if region is None:
        return list(range(len(pair.fan.rays)))
    return pair.fan.closed_star_rays(region)


def is_lc(pair: ToricLogPair, region: Sequence[int] | None = None) -> bool:
    """Log canonical (near ``V(region)`` when a cone is given)."""
    return all(pair.coeffs[i] <= 1 for i in _relevant_rays(pair, region))


def is_klt(pair: ToricLogPair, region: Sequence[int] | None = None) -> bool:
    return all(pair.coeffs[i] < 1 for i in _relevant_rays(pair, region))


def lct(pair: ToricLogPair, D: Sequence, region: Sequence[int] = ()) -> Fraction | float:
    """Largest ``c`` with ``(X, B + cD)`` lc near ``V(region)``; ``inf`` if unbounded."""
    D = tuple(Fraction(x) for x in D)
    if len(D) != len(pair.coeffs):
        raise DomainError("divisor length does not match the ray count")
    if any(x < 0 for x in D):
        raise DomainError("lct needs an effective divisor")
    rays = _relevant_rays(pair, region)
    if any(pair.coeffs[i] > 1 for i in rays):
        raise DomainError("pair is not lc near the region")
    vals = [(1 - pair.coeffs[i]) / D[i] for i in rays if D[i] > 0]
    return min(vals) if vals else INF


def lcs_locus(pair: ToricLogPair) -> list[Cone]:
    """Minimal cones ``tau`` whose orbit closure is an lc center (``a(eta) <= 0``).

    ``V(tau)`` is a center iff some ray of tau has ``b > 1`` or every ray of
    tau has ``b = 1``; the minimal such cones are the rays with ``b >= 1``.
    """
    return [(i,) for i, b in enumerate(pair.coeffs) if b >= 1]


def is_lc_center(pair: ToricLogPair, tau: Sequence[int]) -> bool:
    if not tau:
        return False
    bs = [pair.coeffs[i] for i in tau]
    return any(b > 1 for b in bs) or all(b == 1 for b in bs)


# ---------------------------------------------------------------- resolution

def resolve(pair: ToricLogPair, strategy: str | int = "first",
            cones: Sequence[Cone] | None = None) -> ToricLogPair:
    """Crepant resolution by star subdivisions at box points.

    Only cones meeting the filter (default: all) are made smooth: when
    ``cones`` is a cone ``tau``, only cones containing ``tau`` are
    subdivided.  Candidates are the primitive points of the half-open box of
    the first singular cone, ranked by their largest cone coordinate (which
    bounds the multiplicities of the new cones).  ``strategy`` picks among
    the best-ranked ones: ``"first"`` / ``"last"`` in sorted order,
    ``"deepest"`` the one with the largest coordinate sum, or an integer seed
    for a random but reproducible choice.
    """
    rng = random.Random(strategy) if isinstance(strategy, int) else None
    if rng is None and strategy not in ("first", "last", "deepest"):
        raise DomainError(f"unknown resolution strategy {strategy!r}")
    tau = set(cones) if cones is not None else None
    while True:
        singular = [c for c in pair.fan.maximal
                    if (tau is None or tau <= set(c)) and pair.fan.multiplicity(c) > 1]
        if not singular:
            return pair
        c = singular[0] if rng is None else rng.choice(singular)
        # nonzero elements of the half-open box; each subdivision then lowers multiplicities
        pts = []
        for p in box_points([pair.fan.rays[i] for i in c], relative_interior=False):
            co = pair.fan.coordinates(c, p)
            if is_primitive(p) and all(x < 1 for x in co):
                pts.append((max(co), sum(co), p))
        top = min(k for k, _, _ in pts)
        best = sorted(t for t in pts if t[0] == top)
        if strategy == "first":
            v = best[0][2]
        elif strategy == "last":
            v = best[-1][2]
        elif strategy == "deepest":
            v = max(best, key=lambda t: (t[1], t[2]))[2]
        else:
            v = rng.choice(best)[2]
        pair = crepant_subdivide(pair, v)


# ---------------------------------------------------------------- LCS ideal

@dataclass(frozen=True)
class MonomialIdeal:
    """Monomial ideal in chart coordinates ``x_i = chi^{m}`` with ``<m,u_i>`` exponents.

    ``generators`` are exponent vectors in the basis dual to the chart rays;
    the unit ideal is ``((0,...,0),)``.
    """
    chart: Cone
    generators: tuple[tuple[int, ...], ...]

    @property
    def is_unit(self) -> bool:
        return any(all(e == 0 for e in g) for g in self.generators)

    def contains(self, exponent: Sequence[int]) -> bool:
        return any(all(a >= b for a, b in zip(exponent, g)) for g in self.generators)


def lcs_ideal(pair: ToricLogPair, chart: Cone, resolution: ToricLogPair | None = None,
              variant: str = "truncated") -> MonomialIdeal:
    """Multiplier-type ideal of the LCS on a smooth affine chart.

    A monomial with exponent vector ``e`` (``e_i = <m, u_i>`` for the chart
    rays) lies in the ideal iff ``<m, u> >= floor(p_u)`` for every ray ``u``
    of the resolution lying in the chart, where ``p_u = max(0, 1 - A(u))``
    (``variant="truncated"``) or ``p_u = 1 - A(u)`` (``variant="roundup"``,
    meaningful for effective boundaries).
    """
    fan = pair.fan
    chart = tuple(sorted(chart))
    if len(chart) != fan.dim or fan.multiplicity(chart) != 1:
        raise DomainError("lcs_ideal needs a smooth full-dimensional chart")
    res = resolution if resolution is not None else resolve(pair)
    if not res.fan.is_smooth():
        raise DomainError("resolution is not smooth")
    R = [list(fan.rays[i]) for i in chart]
    Rinv = inverse(R)  # columns: dual basis
    constraints = []
    for j, u in enumerate(res.fan.rays):
        coords = matvec([list(col) for col in zip(*Rinv)], u)  # u in chart-ray coordinates
        if any(c < 0 for c in coords):
            continue
        coords = tuple(int(c) for c in coords)
        a = log_discrepancy(pair, u)
        p = 1 - a
        if variant == "truncated":
            p = max(Fraction(0), p)
        elif variant != "roundup":
            raise DomainError(f"unknown variant {variant!r}")
        constraints.append((coords, math.floor(p)))
    bound = max([rhs for _, rhs in constraints] + [0])
    n = len(chart)
    members = []
    for e in itertools.product(range(bound + 1), repeat=n):
        if all(dot(c, e) >= rhs for c, rhs in constraints):
            members.append(e)
    minimal = [e for e in members
               if not any(f != e and all(a <= b for a, b in zip(f, e)) for f in members)]
    return MonomialIdeal(chart, tuple(sorted(minimal)))
