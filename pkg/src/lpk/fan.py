"""Simplicial fans, invariant divisors and fan morphisms.

Divisors are tuples of Fractions aligned with ``fan.rays``.  The support
function of a divisor ``d`` is the piecewise linear ``psi`` with
``psi(u_rho) = d_rho``; on a maximal cone it equals ``<m_sigma, .>``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .exactcore import (
    DomainError, LinearProgram, adjugate, cone_multiplicity, det, dot, identity,
    invariant_factors, inverse, lcm_of, lp_solve, matvec, primitive, rank,
    saturation_basis, smith_normal_form, solve, transpose,
)

Cone = tuple[int, ...]


def _faces(cone: Cone):
    for k in range(len(cone) + 1):
        yield from itertools.combinations(cone, k)


@dataclass(frozen=True)
class Fan:
    """A simplicial fan; ``cones`` lists every cone, the zero cone included."""
    dim: int
    rays: tuple[tuple[int, ...], ...]
    cones: tuple[Cone, ...]

    @classmethod
    def from_cones(cls, dim: int, rays: Sequence[Sequence[int]], cones: Sequence[Sequence[int]]) -> "Fan":
        rays = tuple(tuple(int(x) for x in u) for u in rays)
        for u in rays:
            if len(u) != dim:
                raise DomainError(f"ray {u} does not have length {dim}")
            if math.gcd(*u) != 1:
                raise DomainError(f"ray {u} is not primitive")
        if len(set(rays)) != len(rays):
            raise DomainError("repeated ray")
        all_cones = set()
        for c in cones:
            c = tuple(sorted(int(i) for i in c))
            if len(set(c)) != len(c) or any(not 0 <= i < len(rays) for i in c):
                raise DomainError(f"bad cone index list {list(c)}")
            if c and rank([rays[i] for i in c]) != len(c):
                raise DomainError(f"cone {list(c)} is not simplicial (dependent rays)")
            all_cones.update(_faces(c))
        all_cones.add(())
        for i in range(len(rays)):
            if (i,) not in all_cones:
                raise DomainError(f"ray {i} is not used by any cone")
        return cls(dim, rays, tuple(sorted(all_cones, key=lambda c: (len(c), c))))

    # --- combinatorics
    @cached_property
    def cone_set(self) -> frozenset:
        return frozenset(self.cones)

    @cached_property
    def maximal(self) -> tuple[Cone, ...]:
        cs = set(self.cones)
        out = []
        for c in self.cones:
            if not any(len(d) > len(c) and set(c) <= set(d) for d in cs):
                out.append(c)
        return tuple(out)

    @cached_property
    def is_complete(self) -> bool:
        if any(len(c) != self.dim for c in self.maximal):
            return False
        walls: dict[Cone, int] = {}
        for c in self.maximal:
            for w in itertools.combinations(c, self.dim - 1):
                walls[w] = walls.get(w, 0) + 1
        return all(v == 2 for v in walls.values())

    def cones_containing(self, tau: Sequence[int]) -> list[Cone]:
        t = set(tau)
        return [c for c in self.cones if t <= set(c)]

    def closed_star_rays(self, tau: Sequence[int]) -> list[int]:
        rays = set()
        for c in self.cones_containing(tau):
            rays.update(c)
        return sorted(rays)

    def ray_index(self, v: Sequence[int]) -> int | None:
        try:
            return self.rays.index(tuple(v))
        except ValueError:
            return None

    def multiplicity(self, cone: Sequence[int]) -> int:
        return cone_multiplicity([self.rays[i] for i in cone])

    def is_smooth(self, cone: Sequence[int] | None = None) -> bool:
        if cone is not None:
            return self.multiplicity(cone) == 1
        return all(self.multiplicity(c) == 1 for c in self.maximal)

    def ray_matrix(self, cone: Sequence[int]) -> list[list[int]]:
        return [list(self.rays[i]) for i in cone]

    # --- membership
    @cached_property
    def _solvers(self):
        out = {}
        for c in self.maximal:
            if not c:
                continue
            U = transpose(self.ray_matrix(c))  # dim x k
            k = len(c)
            rows = None
            for sub in itertools.combinations(range(self.dim), k):
                minor = [U[r] for r in sub]
                d = det(minor)
                if d != 0:
                    rows = (sub, adjugate(minor), d)
                    break
            out[c] = (U, rows)
        return out

    def coordinates(self, cone: Cone, v: Sequence[int | Fraction]) -> tuple[Fraction, ...] | None:
        """Coordinates of ``v`` in the rays of ``cone`` if ``v`` lies in its span."""
        if not cone:
            return () if all(x == 0 for x in v) else None
        M = self._solvers.get(cone)
        if M is None:
            U = transpose(self.ray_matrix(cone))
            sol = solve(U, list(v))
            if sol is None:
                return None
            return sol
        U, (sub, adj, d) = M
        vv = [v[r] for r in sub]
        c = tuple(Fraction(x) / d for x in matvec(adj, vv))
        if any(sum(U[i][j] * c[j] for j in range(len(c))) != v[i] for i in range(self.dim)):
            return None
        return c

    def locate(self, v: Sequence[int | Fraction]) -> tuple[Cone, tuple[Fraction, ...]]:
        """Minimal cone containing ``v`` and the (positive) coordinates of ``v``."""
        v = tuple(v)
        if all(x == 0 for x in v):
            return (), ()
        for c in self.maximal:
            co = self.coordinates(c, v)
            if co is not None and all(x >= 0 for x in co):
                support = tuple(i for i, x in zip(c, co) if x != 0)
                return support, tuple(x for x in co if x != 0)
        raise DomainError(f"vector {v} lies outside the support of the fan")

    def contains(self, v) -> bool:
        try:
            self.locate(v)
            return True
        except DomainError:
            return False


def validate_fan(fan: Fan) -> list[str]:
    """Exhaustive check of the fan axioms; returns a list of violations."""
    problems = []
    for u in fan.rays:
        if math.gcd(*u) != 1:
            problems.append(f"ray {u} not primitive")
    cs = fan.cone_set
    for c in fan.cones:
        if c and rank(fan.ray_matrix(c)) != len(c):
            problems.append(f"cone {list(c)} not simplicial")
        for f in _faces(c):
            if f not in cs:
                problems.append(f"face {list(f)} of cone {list(c)} missing")
    mx = fan.maximal
    for a, b in itertools.combinations(mx, 2):
        if not _meet_properly(fan, a, b):
            problems.append(f"cones {list(a)} and {list(b)} overlap")
    return problems


def _meet_properly(fan: Fan, a: Cone, b: Cone) -> bool:
    """True iff the two simplicial cones intersect in their common face.

    They fail to do so iff some point ``sum l_i u_i = sum m_j v_j`` with
    ``l, m >= 0`` has positive weight off the common rays; that is an LP
    feasibility question with the normalisation ``sum(weights off F) = 1``.
    """
    common = set(a) & set(b)
    ra = [i for i in a]
    rb = [j for j in b]
    nv = len(ra) + len(rb)
    A_eq = []
    b_eq = []
    for t in range(fan.dim):
        row = [fan.rays[i][t] for i in ra] + [-fan.rays[j][t] for j in rb]
        A_eq.append(row)
        b_eq.append(0)
    norm = [0 if i in common else 1 for i in ra] + [0 if j in common else 1 for j in rb]
    if not any(norm):
        return True
    A_eq.append(norm)
    b_eq.append(1)
    res = lp_solve(LinearProgram(tuple([0] * nv), A_eq=tuple(map(tuple, A_eq)), b_eq=tuple(b_eq)))
    return res.status == "infeasible"


def star_subdivision(fan: Fan, v: Sequence[int]) -> Fan:
    """Star subdivision of ``fan`` at the primitive vector ``v``.

    The new ray is appended to the ray list; if ``v`` is already a ray the fan
    is returned unchanged.
    """
    v = tuple(int(x) for x in v)
    if math.gcd(*v) != 1:
        raise DomainError(f"{v} is not primitive")
    if fan.ray_index(v) is not None:
        return fan
    tau, _ = fan.locate(v)
    new = len(fan.rays)
    ts = set(tau)
    cones = []
    for c in fan.maximal:
        if ts <= set(c):
            for r in tau:
                cones.append(tuple(sorted([i for i in c if i != r] + [new])))
        else:
            cones.append(c)
    return Fan.from_cones(fan.dim, fan.rays + (v,), cones)


# ---------------------------------------------------------------- divisors

def _as_divisor(fan: Fan, d) -> tuple[Fraction, ...]:
    d = tuple(Fraction(x) for x in d)
    if len(d) != len(fan.rays):
        raise DomainError("divisor length does not match the ray count")
    return d


def local_character(fan: Fan, d, cone: Cone) -> tuple[Fraction, ...]:
    """A character ``m`` with ``<m, u_rho> = d_rho`` for the rays of ``cone``."""
    d = _as_divisor(fan, d)
    if not cone:
        return tuple([Fraction(0)] * fan.dim)
    m = solve(fan.ray_matrix(cone), [d[i] for i in cone])
    if m is None:  # impossible for simplicial cones
        raise DomainError("divisor is not Q-Cartier")
    return m


def support_function(fan: Fan, d, v: Sequence) -> Fraction:
    """``psi_d(v)``: the linear extension of ``u_rho -> d_rho`` on the cone of ``v``."""
    d = _as_divisor(fan, d)
    cone, co = fan.locate(v)
    return sum((c * d[i] for i, c in zip(cone, co)), Fraction(0))


def cartier_index(fan: Fan, d, cones: Sequence[Cone] | None = None) -> int:
    """Least ``r >= 1`` with ``r*d`` Cartier on the given (default: all maximal) cones.

    Per cone, ``r*d`` is Cartier iff ``r*d|_sigma`` lies in the image of the
    integral characters.  With ``U M^T V = D`` (Smith form of the ray matrix of
    sigma) that image is ``U^{-1} D Z^n``, which gives the exact denominators.
    """
    d = _as_divisor(fan, d)
    cones = fan.maximal if cones is None else cones
    r = 1
    for c in cones:
        if not c:
            continue
        R = fan.ray_matrix(c)  # k x n, maps m -> (<m,u_i>)
        U, D, _ = smith_normal_form(R)
        rhs = matvec(U, [d[i] for i in c])
        dens = []
        for i in range(len(c)):
            if D[i][i] == 0:
                raise DomainError("dependent rays in cone")
            dens.append(Fraction(rhs[i], D[i][i]).denominator)
        r = lcm_of([r] + dens)
    return r


def cartier_data(fan: Fan, d) -> dict[Cone, tuple[Fraction, ...]]:
    """Local characters ``m_sigma`` for every maximal cone."""
    return {c: local_character(fan, d, c) for c in fan.maximal}


@dataclass(frozen=True)
class NefAmpleDegree:
    nef: bool
    ample: bool
    degree: Fraction | None


def nef_ample_degree(fan: Fan, d) -> NefAmpleDegree:
    """Nefness, ampleness and (for nef divisors) the top self-intersection.

    The polytope of ``d`` is ``{m : <m,u_rho> >= -d_rho}`` with vertex
    ``-m_sigma`` for each maximal cone.  The volume is computed with the
    Brion-Lawrence vertex formula for a generic direction ``c``::

        d^n = sum_sigma <c,p_sigma>^n / (mult(sigma) * prod_i -<c, e_{sigma,i}>)

    where ``e_sigma`` is the basis dual to the rays of sigma.
    """
    if not fan.is_complete:
        raise DomainError("nef/ample/degree need a complete fan")
    d = _as_divisor(fan, d)
    n = fan.dim
    data = cartier_data(fan, d)
    nef = True
    ample = True
    for c, m in data.items():
        for i, u in enumerate(fan.rays):
            val = dot(m, u)
            if val > d[i]:
                nef = False
                ample = False
            elif val == d[i] and i not in c:
                ample = False
    if not nef:
        return NefAmpleDegree(False, False, None)
    duals = {}
    for c in fan.maximal:
        R = fan.ray_matrix(c)
        E = inverse(R)  # columns are the dual basis: R @ E = I
        duals[c] = [tuple(E[k][i] for k in range(n)) for i in range(n)]
    for t in itertools.count(2):
        direction = tuple(Fraction(t) ** k for k in range(n))
        if all(dot(direction, e) != 0 for es in duals.values() for e in es):
            break
    total = Fraction(0)
    for c in fan.maximal:
        p = tuple(-x for x in data[c])
        num = dot(direction, p) ** n
        if num == 0:
            continue
        den = Fraction(fan.multiplicity(c))
        for e in duals[c]:
            den *= -dot(direction, e)
        total += num / den
    return NefAmpleDegree(True, ample, total)


def linear_equiv(fan: Fan, d1, d2) -> tuple[Fraction, ...] | None:
    """A character ``m`` with ``d1 - d2 = (<m,u_rho>)_rho``, or None."""
    d1 = _as_divisor(fan, d1)
    d2 = _as_divisor(fan, d2)
    diff = [a - b for a, b in zip(d1, d2)]
    return solve([list(u) for u in fan.rays], diff)


@dataclass(frozen=True)
class DivisorClass:
    """Canonical representative of a Q-divisor modulo principal divisors.

    The representative vanishes on a fixed maximal independent set of rays,
    so two divisors are equivalent iff their representatives coincide.
    """
    fan: Fan = field(repr=False, compare=False, hash=False)
    representative: tuple[Fraction, ...]

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.representative)


def _pivot_rays(fan: Fan) -> list[int]:
    chosen: list[int] = []
    for i, u in enumerate(fan.rays):
        if rank([fan.rays[j] for j in chosen] + [u]) > len(chosen):
            chosen.append(i)
    return chosen


def class_of(fan: Fan, d) -> DivisorClass:
    d = _as_divisor(fan, d)
    piv = _pivot_rays(fan)
    if piv:
        m = solve([list(fan.rays[i]) for i in piv], [d[i] for i in piv])
    else:
        m = tuple([Fraction(0)] * fan.dim)
    rep = tuple(di - dot(m, u) for di, u in zip(d, fan.rays))
    return DivisorClass(fan, rep)


def class_group(fan: Fan) -> tuple[int, list[int]]:
    """Rank and torsion of the class group ``Z^rays / M``."""
    R = [list(u) for u in fan.rays]  # rays x n: the map M -> Z^rays
    f = invariant_factors(R)
    return len(fan.rays) - len(f), [x for x in f if x > 1]


def canonical_divisor(fan: Fan) -> tuple[Fraction, ...]:
    return tuple(Fraction(-1) for _ in fan.rays)


# ---------------------------------------------------------------- star fans and restriction

@dataclass(frozen=True)
class StarFan:
    """The fan of the orbit closure ``V(tau)`` in ``N(tau) = N / (N ∩ span tau)``.

    ``lifts[j] = (i, k)`` says star ray ``j`` is the primitive image of ray
    ``i`` of the ambient fan, whose image is ``k`` times that primitive vector.
    """
    tau: Cone
    fan: Fan
    lifts: tuple[tuple[int, int], ...]
    projection: tuple[tuple[int, ...], ...]

    def project(self, v: Sequence) -> tuple:
        return matvec(self.projection, v)


def star_fan(fan: Fan, tau: Sequence[int]) -> StarFan:
    tau = tuple(sorted(tau))
    if tau not in fan.cone_set:
        raise DomainError(f"{list(tau)} is not a cone of the fan")
    U, k = saturation_basis([fan.rays[i] for i in tau], fan.dim)
    P = tuple(tuple(row) for row in U[k:])
    new_rays: list[tuple[int, ...]] = []
    lifts: list[tuple[int, int]] = []
    index: dict[int, int] = {}
    ts = set(tau)
    for c in fan.cones:
        if len(c) == len(tau) + 1 and ts <= set(c):
            (i,) = [j for j in c if j not in ts]
            img = matvec(P, fan.rays[i])
            g = math.gcd(*img)
            index[i] = len(new_rays)
            new_rays.append(tuple(x // g for x in img))
            lifts.append((i, g))
    cones = []
    for c in fan.cones_containing(tau):
        cones.append(tuple(index[i] for i in c if i not in ts))
    sub = Fan.from_cones(fan.dim - len(tau), new_rays, cones) if new_rays or fan.dim - len(tau) == 0 \
        else Fan(fan.dim - len(tau), (), ((),))
    return StarFan(tau, sub, tuple(lifts), P)


def restrict_divisor(fan: Fan, d, tau: Sequence[int], star: StarFan | None = None) -> tuple[Fraction, ...]:
    """Restriction of the Q-Cartier divisor ``d`` to ``V(tau)``.

    ``d`` is first replaced by the linearly equivalent ``psi_d - m_sigma0``
    (``sigma0`` a maximal cone over ``tau``), which vanishes on ``span tau``
    and therefore descends to the quotient lattice.
    """
    d = _as_divisor(fan, d)
    star = star or star_fan(fan, tau)
    over = [c for c in fan.maximal if set(star.tau) <= set(c)]
    m0 = local_character(fan, d, over[0]) if star.tau else tuple([Fraction(0)] * fan.dim)
    out = []
    for i, k in star.lifts:
        out.append((d[i] - dot(m0, fan.rays[i])) / k)
    return tuple(out)


# ---------------------------------------------------------------- morphisms

@dataclass(frozen=True)
class FanMorphism:
    """A lattice map ``L: N_source -> N_target`` (matrix acting on columns)."""
    matrix: tuple[tuple[int, ...], ...]
    source: Fan
    target: Fan

    def __post_init__(self):
        if len(self.matrix) != self.target.dim or any(len(r) != self.source.dim for r in self.matrix):
            raise DomainError("matrix shape does not match source/target dimensions")

    def apply(self, v: Sequence) -> tuple:
        return matvec(self.matrix, v)

    def image_cone(self, cone: Cone) -> Cone:
        """Smallest target cone containing the image of ``cone``."""
        s = [sum(self.source.rays[i][t] for i in cone) for t in range(self.source.dim)]
        return self.target.locate(self.apply(s))[0]

    @cached_property
    def is_compatible(self) -> bool:
        for c in self.source.maximal:
            try:
                t = set(self.image_cone(c))
            except DomainError:
                return False
            for i in c:
                img = self.apply(self.source.rays[i])
                if any(x != 0 for x in img):
                    co = self.target.coordinates(tuple(sorted(t)), img)
                    if co is None or any(x < 0 for x in co):
                        return False
        return True

    @cached_property
    def is_contraction(self) -> bool:
        f = invariant_factors([list(r) for r in self.matrix]) if self.matrix else []
        return len(f) == self.target.dim and all(x == 1 for x in f)

    @cached_property
    def is_finite(self) -> bool:
        if self.source.dim != self.target.dim or det([list(r) for r in self.matrix]) == 0:
            return False
        if not self.is_compatible:
            return False
        images = set()
        for c in self.source.cones:
            t = self.image_cone(c)
            if len(t) != len(c):
                return False
            images.add(t)
        return images == set(self.target.cones)

    @cached_property
    def is_birational(self) -> bool:
        if self.source.dim != self.target.dim or abs(det([list(r) for r in self.matrix])) != 1:
            return False
        if not self.is_compatible:
            return False
        if self.source.is_complete != self.target.is_complete:
            return False
        if self.source.is_complete:
            return True
        inv = inverse([list(r) for r in self.matrix])
        for c in self.target.cones:
            if not c:
                continue
            s = [sum(self.target.rays[i][t] for i in c) for t in range(self.target.dim)]
            if not self.source.contains(matvec(inv, s)):
                return False
        return True


def pullback_divisor(f: FanMorphism, q) -> tuple[Fraction, ...]:
    """``f^* q``: coefficient at a source ray ``u`` is ``psi_q(L u)``."""
    q = _as_divisor(f.target, q)
    return tuple(support_function(f.target, q, f.apply(u)) for u in f.source.rays)


def compose(g: FanMorphism, f: FanMorphism) -> FanMorphism:
    """``g ∘ f``."""
    if f.target is not g.source and f.target != g.source:
        raise DomainError("morphisms are not composable")
    M = [[sum(g.matrix[i][k] * f.matrix[k][j] for k in range(len(f.matrix)))
          for j in range(f.source.dim)] for i in range(g.target.dim)]
    return FanMorphism(tuple(map(tuple, M)), f.source, g.target)


def identity_morphism(fan: Fan) -> FanMorphism:
    return FanMorphism(tuple(map(tuple, identity(fan.dim))), fan, fan)
