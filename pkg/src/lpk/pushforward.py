"""Discriminants of toric log pairs along fan morphisms, moduli parts and base change."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactcore import (
    DomainError, LinearProgram, box_points, det, dot, inverse, lcm_of, lp_solve, matmul,
    matvec, nullspace, primitive, rank, smith_normal_form, solve, transpose,
)
from .fan import (
    Cone, DivisorClass, Fan, FanMorphism, class_of, nef_ample_degree, star_subdivision,
    support_function,
)
from .logpair import ToricLogPair, crepant_subdivide, log_discrepancy
from .mld import NEG_INF, mld_generic, mld_subset
from .reports import FAIL, INCONCLUSIVE, PASS, ConjectureReport


@dataclass(frozen=True)
class RayCertificate:
    """Exact data behind one discriminant coefficient.

    ``a`` is the minimum of ``A`` over the fiber polytope ``{v : L v = u_Q}``,
    attained at ``vertex`` (inside ``cone``); ``N`` is the largest lattice
    denominator among the fiber polytope's vertices.
    """
    ray: int
    a: Fraction
    vertex: tuple[Fraction, ...]
    cone: Cone
    N: int
    vertices_are_rays: bool
    vertices: tuple[tuple[Fraction, ...], ...] = field(repr=False, default=())


@dataclass(frozen=True)
class DiscriminantResult:
    target: Fan
    coeffs: tuple[Fraction, ...]
    certificates: tuple[RayCertificate, ...]

    @property
    def N(self) -> int:
        return max((c.N for c in self.certificates), default=1)

    @property
    def pair(self) -> ToricLogPair:
        return ToricLogPair(self.target, self.coeffs)


def horizontal_violation(pair: ToricLogPair, f: FanMorphism) -> int | None:
    for i, u in enumerate(pair.fan.rays):
        if all(x == 0 for x in f.apply(u)) and pair.coeffs[i] > 1:
            return i
    return None


def generic_fiber_complete(pair: ToricLogPair, f: FanMorphism) -> bool:
    """Whether the cones inside ``ker L`` form a complete fan there (``f`` proper over η)."""
    k = pair.fan.dim - rank([list(r) for r in f.matrix])
    if k == 0:
        return True
    horiz = [c for c in pair.fan.cones
             if all(all(x == 0 for x in f.apply(pair.fan.rays[i])) for i in c)]
    top = [c for c in horiz if len(c) == k]
    if not top or any(len(c) > k for c in horiz):
        return False
    walls: dict[Cone, int] = {}
    for c in top:
        for w in itertools.combinations(c, k - 1):
            walls[w] = walls.get(w, 0) + 1
    return all(v == 2 for v in walls.values())


def _fiber_vertices(f: FanMorphism, cone: Cone, y: Sequence) -> list[tuple[Fraction, ...]]:
    """Basic solutions ``c >= 0`` of ``L U_cone c = y``, returned as points of N_R."""
    src = f.source
    imgs = {i: f.apply(src.rays[i]) for i in cone}
    out = []
    for k in range(1, len(cone) + 1):
        for S in itertools.combinations(cone, k):
            cols = [imgs[i] for i in S]
            if rank(cols) != k:
                continue
            c = solve(transpose(cols), list(y))
            if c is None or any(x <= 0 for x in c):
                continue
            v = tuple(sum(ci * src.rays[i][t] for ci, i in zip(c, S)) for t in range(src.dim))
            out.append(v)
    return out


def _denominator(v: Sequence[Fraction]) -> int:
    return lcm_of(Fraction(x).denominator for x in v)


def fiber_minimum(pair: ToricLogPair, f: FanMorphism, y: Sequence[int]) -> RayCertificate:
    """``min A`` over ``{v in |Sigma_X| : L v = y}`` by one exact LP per maximal cone."""
    src = pair.fan
    best = None
    vertices: list[tuple[Fraction, ...]] = []
    for cone in src.maximal:
        cols = [f.apply(src.rays[i]) for i in cone]
        A_eq = tuple(tuple(cols[j][t] for j in range(len(cone))) for t in range(f.target.dim))
        obj = tuple(1 - pair.coeffs[i] for i in cone)
        res = lp_solve(LinearProgram(obj, A_eq=A_eq, b_eq=tuple(y)))
        if res.status == "infeasible":
            continue
        if res.status == "unbounded":
            raise DomainError("fiber minimum is unbounded: pair is not lc over the generic point")
        v = tuple(sum(c * src.rays[i][t] for c, i in zip(res.x, cone)) for t in range(src.dim))
        if best is None or res.value < best[0]:
            best = (res.value, v, cone)
        vertices.extend(_fiber_vertices(f, cone, y))
    if best is None:
        raise DomainError(f"empty fiber over {tuple(y)}")
    verts = tuple(sorted(set(vertices)))
    N = max((_denominator(v) for v in verts), default=1)
    on_rays = all(
        any(primitive(tuple(int(x * _denominator(v)) for x in v)) == u for u in src.rays)
        for v in verts)
    return RayCertificate(-1, best[0], best[1], best[2], N, on_rays, verts)


def discriminant(pair: ToricLogPair, f: FanMorphism) -> DiscriminantResult:
    """The discriminant ``B_Y``: coefficient ``1 - a_Q`` at every target ray."""
    if f.source != pair.fan:
        raise DomainError("morphism source is not the pair's fan")
    if not f.is_compatible:
        raise DomainError("morphism is not compatible with the fans")
    bad = horizontal_violation(pair, f)
    if bad is not None:
        raise DomainError(f"not lc over the generic point of the base: horizontal ray {bad} "
                          f"has coefficient {pair.coeffs[bad]}")
    certs = []
    for q, uq in enumerate(f.target.rays):
        c = fiber_minimum(pair, f, uq)
        certs.append(RayCertificate(q, c.a, c.vertex, c.cone, c.N, c.vertices_are_rays, c.vertices))
    coeffs = tuple(1 - c.a for c in certs)
    return DiscriminantResult(f.target, coeffs, tuple(certs))


# ---------------------------------------------------------------- moduli part

@dataclass(frozen=True)
class ModuliPart:
    """``K_X + B - f^*(K_Y + B_Y) = f^* M + div(chi)``."""
    divisor: tuple[Fraction, ...]
    divisor_class: DivisorClass
    character: tuple[Fraction, ...]
    nef: bool | None
    discriminant: DiscriminantResult


class RelativeTrivialityError(DomainError):
    def __init__(self, message, obstruction):
        super().__init__(message)
        self.obstruction = obstruction


def moduli_part(pair: ToricLogPair, f: FanMorphism, disc: DiscriminantResult | None = None) -> ModuliPart:
    disc = disc or discriminant(pair, f)
    X, Y = pair.fan, f.target
    kb_y = tuple(b - 1 for b in disc.coeffs)
    rows, rhs = [], []
    for i, u in enumerate(X.rays):
        y = f.apply(u)
        cone, co = Y.locate(y)
        row = [Fraction(0)] * len(Y.rays)
        for j, c in zip(cone, co):
            row[j] = c
        row += [Fraction(x) for x in u]
        rows.append(row)
        rhs.append((pair.coeffs[i] - 1) - support_function(Y, kb_y, y))
    sol = solve(rows, rhs)
    if sol is None:
        raise RelativeTrivialityError(
            "K_X + B is not Q-linearly trivial over the base",
            {"difference": tuple(rhs)})
    M = tuple(sol[:len(Y.rays)])
    chi = tuple(sol[len(Y.rays):])
    # re-verify the defining identity
    for i, u in enumerate(X.rays):
        y = f.apply(u)
        lhs = (pair.coeffs[i] - 1) - support_function(Y, kb_y, y)
        if lhs != support_function(Y, M, y) + dot(chi, u):
            raise AssertionError("moduli part identity failed")
    nef = nef_ample_degree(Y, M).nef if Y.is_complete else None
    return ModuliPart(M, class_of(Y, M), chi, nef, disc)


# ---------------------------------------------------------------- finite base change

@dataclass(frozen=True)
class InducedFibration:
    """``f': (X', B') -> Y'`` with ``X'`` the normalized lattice fiber product.

    ``basis`` has the N_X' basis vectors as columns (in N_X coordinates).
    """
    pair: ToricLogPair
    morphism: FanMorphism
    basis: tuple[tuple[int, ...], ...]


def fiber_product(pair: ToricLogPair, f: FanMorphism, sigma: FanMorphism) -> InducedFibration:
    if sigma.target != f.target:
        raise DomainError("base change does not land in the base of f")
    if not sigma.is_finite:
        raise DomainError("base change is not finite")
    n = pair.fan.dim
    iota = [list(r) for r in sigma.matrix]
    d = abs(det(iota))
    iota_inv = inverse(iota)
    A = [[sum(d * iota_inv[i][k] * f.matrix[k][j] for k in range(len(iota))) for j in range(n)]
         for i in range(len(iota))]
    A = [[int(x) for x in row] for row in A]
    # a in N_X' iff A a in d Z^m
    _, D, Q = smith_normal_form(A)
    scale = []
    for i in range(n):
        Dii = D[i][i] if i < len(D) else 0
        scale.append(d // math.gcd(d, Dii) if Dii else 1)
    B = [[Q[r][c] * scale[c] for c in range(n)] for r in range(n)]
    Binv = inverse(B)
    rays, coeffs = [], []
    for i, u in enumerate(pair.fan.rays):
        w = matvec(Binv, u)
        den = lcm_of(x.denominator for x in w)
        w = primitive([int(x * den) for x in w])
        t = next(t for t in range(n) if u[t] != 0)
        k = Fraction(matvec(B, w)[t], u[t])  # B w = k u
        rays.append(w)
        coeffs.append(1 - k * (1 - pair.coeffs[i]))
    fan = Fan.from_cones(n, rays, pair.fan.maximal)
    Lp = matmul(matmul(iota_inv, [list(r) for r in f.matrix]), B)
    if any(Fraction(x).denominator != 1 for row in Lp for x in row):
        raise AssertionError("induced lattice map is not integral")
    Lp = tuple(tuple(int(x) for x in row) for row in Lp)
    newpair = ToricLogPair(fan, tuple(coeffs))
    return InducedFibration(newpair, FanMorphism(Lp, fan, sigma.source),
                            tuple(tuple(r) for r in B))


def finite_base_change(pair: ToricLogPair, f: FanMorphism, sigma: FanMorphism) -> ConjectureReport:
    """Check ``a_{Q'} = w a_Q`` for every ray ``Q'`` of the covering base."""
    disc = discriminant(pair, f)
    ind = fiber_product(pair, f, sigma)
    disc2 = discriminant(ind.pair, ind.morphism)
    ledger = []
    ok = True
    for q2, u2 in enumerate(sigma.source.rays):
        img = sigma.apply(u2)
        cone, co = f.target.locate(img)
        if len(cone) != 1:
            raise DomainError("finite base change maps a ray off the rays of the base")
        q = cone[0]
        w = co[0]
        a, a2 = disc.certificates[q].a, disc2.certificates[q2].a
        ledger.append({"ray": q2, "over": q, "w": w, "a_Q": a, "a_Q'": a2, "w*a_Q": w * a})
        ok &= a2 == w * a
    return ConjectureReport("finite_base_change", PASS if ok else FAIL,
                            witness={} if ok else {"ledger": ledger},
                            certificates={"ledger": ledger, "degree": abs(det([list(r) for r in sigma.matrix]))})


# ---------------------------------------------------------------- birational base change

def induced_refinement(pair: ToricLogPair, f: FanMorphism, base: Fan) -> ToricLogPair:
    """Crepant refinement of the source so that every cone maps into a cone of ``base``.

    ``base`` refines ``f.target`` in the same lattice.  Source cones are cut
    by the hyperplanes of the walls of ``base``: whenever two rays of a cone
    lie strictly on opposite sides, the cone is star subdivided at the point
    of the edge between them lying on the hyperplane.
    """
    normals = set()
    m = base.dim
    for c in base.cones:
        if len(c) == m - 1:
            sol = _normal(base, c)
            if sol is not None:
                normals.add(sol)
    for h in sorted(normals):
        while True:
            hit = None
            for c in pair.fan.cones:
                if len(c) != 2:
                    continue
                i, j = c
                si = dot(h, f.apply(pair.fan.rays[i]))
                sj = dot(h, f.apply(pair.fan.rays[j]))
                if si > 0 > sj or sj > 0 > si:
                    ui, uj = pair.fan.rays[i], pair.fan.rays[j]
                    v = tuple(abs(si) * b + abs(sj) * a for a, b in zip(ui, uj))
                    hit = primitive(v)
                    break
            if hit is None:
                break
            pair = crepant_subdivide(pair, hit)
    g = FanMorphism(f.matrix, pair.fan, base)
    if not g.is_compatible:
        raise DomainError("could not build a compatible source refinement")
    return pair


def _normal(fan: Fan, wall: Cone) -> tuple[int, ...] | None:
    R = fan.ray_matrix(wall)
    ns = nullspace(R, fan.dim) if R else None
    if not ns or len(ns) != 1:
        return None
    v = ns[0]
    k = lcm_of(x.denominator for x in v)
    h = primitive([int(x * k) for x in v])
    first = next(x for x in h if x != 0)
    return h if first > 0 else tuple(-x for x in h)


@dataclass
class BaseChangeResult:
    sigma_divisor: tuple[Fraction, ...]
    report: ConjectureReport
    source: ToricLogPair
    discriminant: DiscriminantResult


def birational_base_change(pair: ToricLogPair, f: FanMorphism, sigma: FanMorphism,
                           source: ToricLogPair | None = None) -> BaseChangeResult:
    """``Sigma = (B^{X'})_{Y'} - (B_Y)^{Y'}`` for a birational base refinement ``sigma``."""
    if sigma.target != f.target or not sigma.is_birational:
        raise DomainError("sigma must be a birational refinement of the base")
    disc = discriminant(pair, f)
    Lp = matmul(inverse([list(r) for r in sigma.matrix]), [list(r) for r in f.matrix])
    g = FanMorphism(tuple(tuple(int(x) for x in row) for row in Lp), pair.fan, sigma.source)
    Xp = source if source is not None else induced_refinement(pair, g, sigma.source)
    gp = FanMorphism(g.matrix, Xp.fan, sigma.source)
    if not gp.is_compatible:
        raise DomainError("source refinement is not compatible with the base refinement")
    disc2 = discriminant(Xp, gp)
    base_pair = disc.pair
    Sigma = []
    for q, u in enumerate(sigma.source.rays):
        pulled = 1 - log_discrepancy(base_pair, sigma.apply(u))
        Sigma.append(disc2.coeffs[q] - pulled)
    Sigma = tuple(Sigma)
    exceptional = all(s == 0 for q, s in enumerate(Sigma)
                      if sigma.target.ray_index(sigma.apply(sigma.source.rays[q])) is not None)
    effective = all(s >= 0 for s in Sigma)
    klt_generic = all(pair.coeffs[i] < 1 for i, u in enumerate(pair.fan.rays)
                      if all(x == 0 for x in f.apply(u)))
    try:
        moduli_part(pair, f, disc)
        trivial = True
    except DomainError:
        trivial = False
    proper = generic_fiber_complete(pair, f)
    cert = {"Sigma": Sigma, "exceptional": exceptional, "effective": effective,
            "klt_over_generic_point": klt_generic, "relatively_trivial": trivial,
            "generic_fiber_complete": proper}
    hypotheses = klt_generic and trivial and proper
    if all(s == 0 for s in Sigma):
        verdict = PASS
    elif hypotheses:
        verdict = FAIL
    else:
        verdict = INCONCLUSIVE
    rep = ConjectureReport("base_change", verdict,
                           witness={} if verdict == PASS else {"Sigma": Sigma}, certificates=cert)
    if not exceptional:
        rep.notes.append("Sigma is not exceptional")
    if hypotheses and not effective:
        rep.notes.append("Sigma is not effective although the hypotheses hold")
    return BaseChangeResult(Sigma, rep, Xp, disc2)


# ---------------------------------------------------------------- inverse of adjunction

@dataclass(frozen=True)
class InverseAdjunctionBounds:
    lower: Fraction | float
    mid: Fraction | float
    upper: Fraction | float
    N: int
    naive_mid: Fraction | float | None
    upper_witness: tuple | None
    mid_witness: tuple | None

    @property
    def holds(self) -> bool:
        return self.lower <= self.mid <= self.upper


def inverse_adjunction_bounds(pair: ToricLogPair, f: FanMorphism,
                              Z: Sequence[Sequence[int]]) -> InverseAdjunctionBounds:
    """``(1/N) a(f^-1 Z; X, B) <= a(Z; Y, B_Y) <= a(f^-1 Z; X, B)``.

    The middle term is the mld of the discriminant computed on arbitrarily
    high birational models of the base: a base valuation ``y`` has log
    discrepancy ``min A`` over its fiber, which is linear on the images of
    the source cones on which ``L`` is injective.  It is therefore the minimum,
    over such cones whose image is centered inside ``Z``, of that linear
    function on the lattice points of the relative interior of the image.
    ``naive_mid`` is the mld of ``(Y, B_Y)`` itself.
    """
    targets = [set(t) for t in Z]
    if not targets or any(not t for t in targets):
        raise DomainError("Z must be a nonempty list of nonzero cones of the base")
    X = pair.fan
    relevant = []
    for c in X.cones:
        if c and any(t <= set(f.image_cone(c)) for t in targets):
            relevant.append(c)
    if not relevant:
        raise DomainError("no source cone lies over Z")
    upper, upper_w = mld_subset(pair, relevant)
    candidates = []
    N = 1
    for c in relevant:
        gens = [f.apply(X.rays[i]) for i in c]
        if rank(gens) != len(c):
            continue
        a = [1 - pair.coeffs[i] for i in c]
        if any(x < 0 for x in a):
            candidates.append((NEG_INF, c, ()))
            continue
        for p in box_points(gens, relative_interior=True):
            co = solve(transpose(gens), list(p))
            val = sum((ci * ai for ci, ai in zip(co, a)), Fraction(0))
            v = tuple(sum(ci * X.rays[i][t] for ci, i in zip(co, c)) for t in range(X.dim))
            N = max(N, _denominator(v))
            candidates.append((val, c, p))
    if not candidates:
        raise DomainError("no source cone maps injectively over Z")
    mid, c_best, p_best = min(candidates)
    mid_w = (c_best, p_best)
    try:
        disc = discriminant(pair, f)
        naive, _ = mld_subset(disc.pair, [tuple(sorted(t)) for t in targets])
    except DomainError:
        naive = None
    lower = upper / N if upper != NEG_INF else NEG_INF
    return InverseAdjunctionBounds(lower, mid, upper, N, naive, upper_w, mid_w)


def check_inverse_adjunction(pair: ToricLogPair, f: FanMorphism, Z) -> ConjectureReport:
    b = inverse_adjunction_bounds(pair, f, Z)
    cert = {"lower": b.lower, "mid": b.mid, "upper": b.upper, "N": b.N, "naive_mid": b.naive_mid}
    if b.holds:
        return ConjectureReport("inverse_adjunction", PASS, certificates=cert)
    return ConjectureReport("inverse_adjunction", FAIL, witness=cert, certificates=cert)
