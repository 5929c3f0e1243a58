"""lc centers, restriction to boundary divisors and the different."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exactcore import DomainError
from .fan import (
    Cone, Fan, FanMorphism, StarFan, canonical_divisor, cartier_index, identity,
    linear_equiv, restrict_divisor, star_fan,
)
from .logpair import ToricLogPair, is_lc_center, resolve
from .mld import NEG_INF, mld_generic, mld_subset, point_profile
from .pushforward import DiscriminantResult, discriminant
from .reports import FAIL, PASS, ConjectureReport


@dataclass(frozen=True)
class LcCenter:
    """``V(cone)`` with ``a(eta) <= 0``.

    ``places`` is ``"single"`` (one lc place, the ray itself), ``"face"`` (A
    vanishes on the whole cone, so every interior vector is a place) or
    ``"non-lc"`` (``a = -inf``).
    """
    cone: Cone
    generic_mld: Fraction | float
    places: str
    place: tuple[int, ...] | None
    exceptional: bool


def lc_centers(pair: ToricLogPair) -> list[LcCenter]:
    out = []
    for c in pair.fan.cones:
        if not c or not is_lc_center(pair, c):
            continue
        val, _ = mld_generic(pair, c)
        if val == NEG_INF:
            out.append(LcCenter(c, val, "non-lc", None, False))
        elif len(c) == 1:
            out.append(LcCenter(c, val, "single", pair.fan.rays[c[0]], True))
        else:
            out.append(LcCenter(c, val, "face", None, False))
    return out


@dataclass(frozen=True)
class ModelDegenerate:
    """Outcome for centers of codimension >= 2: A vanishes on the whole face."""
    cone: Cone
    zero_face: Cone
    reason: str


def _star_is_smooth(pair: ToricLogPair, rho: int) -> bool:
    return all(pair.fan.multiplicity(c) == 1 for c in pair.fan.maximal if rho in c)


def snc_restriction(pair: ToricLogPair, rho: int, star: StarFan | None = None) -> ToricLogPair:
    """``(E, B_E)`` for a boundary divisor ``E = V(rho)`` with coefficient 1 and smooth star."""
    if pair.coeffs[rho] != 1:
        raise DomainError("restriction needs a boundary component with coefficient 1")
    if not _star_is_smooth(pair, rho):
        raise DomainError("the star of the ray is not smooth")
    star = star or star_fan(pair.fan, (rho,))
    coeffs = []
    for i, k in star.lifts:
        if k != 1:
            raise DomainError("projection multiplicity > 1 on a smooth star")
        coeffs.append(pair.coeffs[i])
    return ToricLogPair(star.fan, tuple(coeffs))


@dataclass(frozen=True)
class DifferentResult:
    """``(K_X + B)|_W ~ K_W + B_W + M_W`` for ``W = V(rho)``."""
    rho: int
    base: ToricLogPair
    star: StarFan
    moduli: tuple[Fraction, ...]
    moduli_trivial: bool
    index_X: int
    index_W: int
    certificates: DiscriminantResult
    resolved: ToricLogPair
    restricted: ToricLogPair

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return self.base.coeffs

    def image_cone(self, cone: Sequence[int]) -> Cone:
        index = {i: j for j, (i, _) in enumerate(self.star.lifts)}
        return tuple(sorted(index[i] for i in cone if i != self.rho))


def different(pair: ToricLogPair, rho: int, strategy: str | int = "first") -> DifferentResult:
    """The different on ``W = V(rho)``: resolve, restrict, push forward.

    The star of ``rho`` is made smooth by crepant star subdivisions, the
    boundary is restricted to ``E = V(rho)`` upstairs, and the discriminant of
    ``(E, B_E)`` along the birational map ``E -> W`` is ``B_W``.
    """
    fan = pair.fan
    if not 0 <= rho < len(fan.rays):
        raise DomainError(f"no ray {rho}")
    if pair.coeffs[rho] != 1:
        raise DomainError("the different is defined along boundary components with coefficient 1")
    if any(pair.coeffs[i] > 1 for i in fan.closed_star_rays((rho,))):
        raise DomainError("the pair is not lc near the center")
    res = resolve(pair, strategy, cones=(rho,))
    up = star_fan(res.fan, (rho,))
    E = snc_restriction(res, rho, up)
    down = star_fan(fan, (rho,))
    W = down.fan
    if W.dim == 0:
        disc = DiscriminantResult(W, (), ())
    else:
        g = FanMorphism(tuple(map(tuple, identity(W.dim))), E.fan, W)
        disc = discriminant(E, g)
    base = ToricLogPair(W, disc.coeffs)
    kb = tuple(b - 1 for b in pair.coeffs)
    restricted = restrict_divisor(fan, kb, (rho,), down)
    M = tuple(r - (b - 1) for r, b in zip(restricted, base.coeffs))
    trivial = linear_equiv(W, M, [0] * len(M)) is not None if W.rays else True
    around = [c for c in fan.maximal if rho in c]
    rX = cartier_index(fan, kb, around)
    rW = cartier_index(W, tuple(b - 1 for b in base.coeffs)) if W.rays else 1
    return DifferentResult(rho, base, down, M, trivial, rX, rW, disc, res, E)


def adjunction_center(pair: ToricLogPair, tau: Sequence[int], strategy="first"):
    """Different for codimension-1 centers; structured outcome otherwise."""
    tau = tuple(sorted(tau))
    if len(tau) == 1:
        return different(pair, tau[0], strategy)
    if not is_lc_center(pair, tau):
        raise DomainError(f"V({list(tau)}) is not an lc center")
    return ModelDegenerate(tau, tau, "log discrepancy vanishes on the whole cone; "
                                     "the center has infinitely many toric lc places")


def check_codim1_adjunction(pair: ToricLogPair, rho: int, strategy="first") -> ConjectureReport:
    """Index divisibility and ``a(Z; X, B) <= a(Z; W, B_W)`` on every invariant ``Z`` in ``W``."""
    if not any(c.cone == (rho,) for c in lc_centers(pair)):
        raise DomainError(f"V({rho}) is not an lc center")
    d = different(pair, rho, strategy)
    N = d.certificates.N
    ledger = []
    ok = d.index_X % d.index_W == 0 and d.moduli_trivial
    for c in pair.fan.cones:
        if rho not in c or len(c) == 1:
            continue
        aX, _ = mld_subset(pair, [c])
        cw = d.image_cone(c)
        aW, _ = mld_subset(d.base, [cw])
        good = aX <= aW and (aX / N if aX != NEG_INF else aX) <= aW
        ledger.append({"cone": list(c), "base_cone": list(cw), "a_X": aX, "a_W": aW, "holds": good})
        ok &= good
    cert = {"index_X": d.index_X, "index_W": d.index_W, "N": N,
            "moduli_trivial": d.moduli_trivial, "different": d.coeffs, "strata": ledger}
    return ConjectureReport("codim1_adjunction", PASS if ok else FAIL,
                            witness={} if ok else {"strata": [e for e in ledger if not e["holds"]]},
                            certificates=cert)


def check_precise_inverse(pair: ToricLogPair, rho: int, x: Sequence[int],
                          strategy="first") -> ConjectureReport:
    """Compare ``a((mu|_E)^{-1}(x); E, B_E)`` with ``a(x; X, B)`` at a fixed point ``x``."""
    x = tuple(sorted(x))
    fan = pair.fan
    if rho not in x or x not in fan.cone_set or len(x) != fan.dim:
        raise DomainError("x must be a full-dimensional cone containing the ray")
    right = point_profile(pair)[x].point
    d = different(pair, rho, strategy)
    if fan.dim == 1:
        left = Fraction(0)
    else:
        sigma_bar = d.image_cone(x)
        E = d.restricted
        over = []
        for c in E.fan.cones:
            if not c:
                continue
            s = [sum(E.fan.rays[i][t] for i in c) for t in range(E.fan.dim)]
            if d.base.fan.locate(s)[0] == sigma_bar:
                over.append(c)
        left, _ = mld_subset(E, over)
    cert = {"left": left, "right": right}
    if left == right:
        return ConjectureReport("precise_inverse_adjunction", PASS, certificates=cert)
    rep = ConjectureReport("precise_inverse_adjunction", FAIL, witness=cert, certificates=cert)
    rep.notes.append("left < right contradicts the unconditional inequality" if left < right
                     else "strict inequality: candidate counterexample to equality")
    return rep
