"""Command dispatch shared by the CLI, the fuzzer and record replay.

Every command maps ``(instance, options)`` to an :class:`Outcome`: a
verdict (``COMPUTED`` for plain computations), a JSON payload and a table
for humans.  Outcomes depend only on their inputs, so a stored record can
be replayed by calling :func:`run` again.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .adjunction import (
    ModelDegenerate, adjunction_center, check_codim1_adjunction, check_precise_inverse,
)
from .bld import bld_invariant, check_fujita, check_quadratic_bound, kollar_recursion, verify_bld_witness
from .catalog import scaling
from .exactcore import DomainError, format_rat, primitive
from .fan import Fan, FanMorphism, nef_ample_degree, star_subdivision
from .instance import Instance
from .logpair import lcs_ideal, lcs_locus, lct, resolve
from .mld import check_max_mld, check_semicontinuity, mld_generic, mld_subset, point_profile
from .pushforward import (
    birational_base_change, check_inverse_adjunction, discriminant, finite_base_change, moduli_part,
)
from .reports import FAIL, INCONCLUSIVE, PASS, ConjectureReport, jsonable

COMPUTED = "COMPUTED"
SUITES = ("semicont", "maxmld", "preciseinv", "adjunction", "fbc", "bcc", "invadj", "fujita", "quadbound")
COMMANDS = ("mld", "lct", "lcs", "disc", "diff", "bld")


class UsageError(Exception):
    pass


@dataclass
class Outcome:
    verdict: str
    payload: dict
    table: list[tuple[str, str]] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return self.verdict == FAIL


def _fmt(x) -> str:
    if isinstance(x, (Fraction, int, float)):
        return format_rat(x)
    if isinstance(x, tuple):
        return "(" + ", ".join(_fmt(v) for v in x) + ")"
    if isinstance(x, list):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return str(x)


def parse_at(text: str | None, fan: Fan, default: str = "origin") -> tuple[int, ...]:
    """``origin`` (the unique maximal cone), ``torus`` (the zero cone) or ray indices ``0,2``."""
    text = default if text is None else text.strip()
    if text == "torus":
        return ()
    if text == "origin":
        top = [c for c in fan.maximal if len(c) == fan.dim]
        if len(top) != 1:
            raise UsageError("--at origin needs an affine instance; pass ray indices like --at 0,1")
        return top[0]
    try:
        cone = tuple(sorted(int(x) for x in text.split(",") if x.strip()))
    except ValueError:
        raise UsageError(f"--at expects origin, torus or comma-separated ray indices, got {text!r}") from None
    if cone not in fan.cone_set:
        raise UsageError(f"{list(cone)} is not a cone of the fan")
    return cone


def _divisor(inst: Instance, name: str | None):
    if name is None:
        if len(inst.divisors) == 1:
            return next(iter(inst.divisors.values()))
        raise UsageError("--divisor NAME is required" if inst.divisors else "the instance has no divisors")
    if name not in inst.divisors:
        raise UsageError(f"no divisor named {name!r}; known: {sorted(inst.divisors)}")
    return inst.divisors[name]


def _morphism(inst: Instance) -> FanMorphism:
    if inst.morphism is None:
        raise UsageError("this command needs an instance with a morphism")
    return inst.morphism


def _report(rep: ConjectureReport) -> Outcome:
    rows = [("verdict", rep.verdict)]
    for k, v in rep.certificates.items():
        if not isinstance(v, (list, dict)):
            rows.append((k, _fmt(v)))
    for note in rep.notes:
        rows.append(("note", note))
    return Outcome(rep.verdict, rep.to_json(), rows)


def _combine(name: str, reports: list[ConjectureReport], extra: dict | None = None) -> Outcome:
    verdicts = [r.verdict for r in reports]
    if FAIL in verdicts:
        verdict = FAIL
    elif verdicts and all(v == PASS for v in verdicts):
        verdict = PASS
    else:
        verdict = INCONCLUSIVE
    payload = {"name": name, "verdict": verdict, "reports": [r.to_json() for r in reports]}
    if extra:
        payload.update(jsonable(extra))
    rows = [("verdict", verdict), ("cases", str(len(reports)))]
    rows += [(f"case {i}", r.verdict) for i, r in enumerate(reports) if r.verdict != PASS]
    return Outcome(verdict, payload, rows)


# ---------------------------------------------------------------- computations

def cmd_mld(inst: Instance, at=None, **_) -> Outcome:
    pair = inst.pair
    cone = parse_at(at, pair.fan)
    if not cone:
        raise UsageError("the mld at the generic point of X is not defined; pick a cone")
    val, wit = mld_generic(pair, cone)
    point = point_profile(pair)[cone].point
    sub, (where, wsub) = mld_subset(pair, [cone])
    payload = jsonable({"cone": cone, "mld": val, "witness": wit, "point_value": point,
                        "closed_mld": sub, "closed_witness_cone": where, "closed_witness": wsub})
    rows = [("cone", _fmt(list(cone))), ("mld", _fmt(val)), ("witness", _fmt(wit)),
            ("a(x)", _fmt(point)), ("mld over V(cone)", _fmt(sub))]
    return Outcome(COMPUTED, payload, rows)


def cmd_lct(inst: Instance, at=None, divisor=None, **_) -> Outcome:
    D = _divisor(inst, divisor)
    region = parse_at(at, inst.fan, default="torus")
    val = lct(inst.pair, D, region)
    payload = jsonable({"region": region, "divisor": D, "lct": val})
    return Outcome(COMPUTED, payload, [("region", _fmt(list(region))), ("lct", _fmt(val))])


def cmd_lcs(inst: Instance, **_) -> Outcome:
    pair = inst.pair
    locus = lcs_locus(pair)
    res = resolve(pair)
    charts = {}
    for c in res.fan.maximal:
        if len(c) == res.fan.dim:
            charts[c] = lcs_ideal(res, c, resolution=res).generators
    payload = jsonable({"locus": locus, "resolution_rays": res.fan.rays, "ideals": charts})
    rows = [("lc centers (rays)", _fmt([list(c) for c in locus]))]
    rows += [(f"chart {list(c)}", _fmt([list(g) for g in gens])) for c, gens in charts.items()]
    return Outcome(COMPUTED, payload, rows)


def cmd_disc(inst: Instance, **_) -> Outcome:
    f = _morphism(inst)
    disc = discriminant(inst.pair, f)
    payload = {"coeffs": disc.coeffs, "N": disc.N,
               "certificates": [{"ray": c.ray, "a": c.a, "vertex": c.vertex, "cone": c.cone,
                                 "N": c.N, "vertices_are_rays": c.vertices_are_rays}
                                for c in disc.certificates]}
    rows = [(f"ray {i} {_fmt(u)}", _fmt(b)) for i, (u, b) in enumerate(zip(f.target.rays, disc.coeffs))]
    rows.append(("N", str(disc.N)))
    try:
        M = moduli_part(inst.pair, f, disc)
        payload["moduli"] = {"divisor": M.divisor, "nef": M.nef, "character": M.character}
        rows.append(("moduli part", _fmt(M.divisor)))
        rows.append(("moduli nef", str(M.nef)))
    except DomainError as e:
        payload["moduli"] = None
        rows.append(("moduli part", f"undefined: {e}"))
    return Outcome(COMPUTED, jsonable(payload), rows)


def cmd_diff(inst: Instance, at=None, **_) -> Outcome:
    cone = parse_at(at, inst.fan, default="0")
    got = adjunction_center(inst.pair, cone)
    if isinstance(got, ModelDegenerate):
        return Outcome(COMPUTED, jsonable(got), [("outcome", "model-degenerate"), ("reason", got.reason)])
    payload = jsonable({"rho": got.rho, "base_rays": got.base.fan.rays, "different": got.coeffs,
                        "moduli": got.moduli, "moduli_trivial": got.moduli_trivial,
                        "index_X": got.index_X, "index_W": got.index_W})
    rows = [(f"ray {_fmt(u)}", _fmt(b)) for u, b in zip(got.base.fan.rays, got.coeffs)]
    rows += [("index X", str(got.index_X)), ("index W", str(got.index_W)),
             ("moduli trivial", str(got.moduli_trivial))]
    return Outcome(COMPUTED, payload, rows)


def cmd_bld(inst: Instance, at=None, divisor=None, **_) -> Outcome:
    H = _divisor(inst, divisor)
    cone = parse_at(at, inst.fan)
    res = bld_invariant(inst.pair, H, cone)
    payload = {"label": res.label, "value": res.value, "divisor": res.divisor,
               "character": res.character, "box_point": res.box_point, "a_x": res.mld_at_x,
               "quadratic_bound": res.quadratic_bound, "verdict": res.verdict,
               "witness_verified": verify_bld_witness(inst.pair, H, cone, res)}
    rows = [("c* (" + res.label + ")", _fmt(res.value)), ("witness D", _fmt(res.divisor)),
            ("character m", _fmt(res.character)), ("a(x)", _fmt(res.mld_at_x)),
            ("n(n+1)/2", _fmt(res.quadratic_bound)), ("c* <= a(x)", res.verdict)]
    try:
        trace = kollar_recursion(inst.pair, H, cone)
        payload["recursion"] = {"steps": [(s.center, s.c) for s in trace.steps],
                                "total": trace.total, "complete": trace.complete}
        rows.append(("recursion total", _fmt(trace.total)))
    except DomainError as e:
        payload["recursion"] = None
        rows.append(("recursion", f"skipped: {e}"))
    return Outcome(COMPUTED, jsonable(payload), rows)


# ---------------------------------------------------------------- conjecture suites

def default_finite_covers(f: FanMorphism) -> list[FanMorphism]:
    return [scaling(f.target, k) for k in (2, 3)]


def default_blowup(f: FanMorphism) -> FanMorphism:
    Y = f.target
    top = [c for c in Y.maximal if len(c) == Y.dim and len(c) >= 2]
    if not top:
        raise UsageError("the base has no cone of dimension >= 2 to blow up; give base_change")
    c = top[0]
    v = primitive([sum(Y.rays[i][t] for i in c) for t in range(Y.dim)])
    Yp = star_subdivision(Y, v)
    ident = tuple(tuple(1 if i == j else 0 for j in range(Y.dim)) for i in range(Y.dim))
    return FanMorphism(ident, Yp, Y)


def check(suite: str, inst: Instance, at=None, divisor=None, strategy="first") -> Outcome:
    pair = inst.pair
    if suite == "semicont":
        return _report(check_semicontinuity(pair))
    if suite == "maxmld":
        return _report(check_max_mld(pair))
    if suite == "adjunction":
        rho = parse_at(at, inst.fan, default="0")
        if len(rho) != 1:
            raise UsageError("check adjunction needs --at RAY")
        rep = check_codim1_adjunction(pair, rho[0], strategy)
        return _report(rep)
    if suite == "preciseinv":
        x = parse_at(at, inst.fan)
        rhos = [i for i in x if pair.coeffs[i] == 1]
        if not rhos:
            raise UsageError("no ray of the chosen cone has coefficient 1")
        return _report(check_precise_inverse(pair, rhos[0], x, strategy))
    if suite == "fbc":
        f = _morphism(inst)
        covers = [inst.base_change] if inst.base_change is not None else default_finite_covers(f)
        return _combine("finite_base_change", [finite_base_change(pair, f, s) for s in covers])
    if suite == "bcc":
        f = _morphism(inst)
        sigma = inst.base_change if inst.base_change is not None else default_blowup(f)
        return _report(birational_base_change(pair, f, sigma).report)
    if suite == "invadj":
        f = _morphism(inst)
        Z = parse_at(at, f.target, default="0")
        if not Z:
            raise UsageError("Z must be a nonzero cone of the base")
        return _report(check_inverse_adjunction(pair, f, [Z]))
    if suite == "fujita":
        L = _divisor(inst, divisor)
        n = inst.fan.dim
        return _combine("fujita", [check_fujita(inst.fan, L, m) for m in range(n + 1, n + 4)])
    if suite == "quadbound":
        H = _divisor(inst, divisor)
        if at is not None:
            points = [parse_at(at, inst.fan)]
        else:
            points = [c for c in inst.fan.maximal if len(c) == inst.fan.dim]
        if not nef_ample_degree(inst.fan, H).ample:
            raise DomainError("H is not ample")
        return _combine("quadratic_bound", [check_quadratic_bound(pair, H, x) for x in points])
    raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")


def run(command: str, inst: Instance, options: dict) -> Outcome:
    """Evaluate ``command`` (``mld`` ... ``bld`` or ``check:<suite>``)."""
    if command.startswith("check:"):
        return check(command.split(":", 1)[1], inst, **options)
    handler = {"mld": cmd_mld, "lct": cmd_lct, "lcs": cmd_lcs, "disc": cmd_disc,
               "diff": cmd_diff, "bld": cmd_bld}.get(command)
    if handler is None:
        raise UsageError(f"unknown command {command!r}")
    return handler(inst, **options)
