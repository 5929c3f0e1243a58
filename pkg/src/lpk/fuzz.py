"""Seeded random instances and the fuzz driver.

Every case is identified by ``(suite, seed, dims)``; :func:`regenerate`
rebuilds its instance and options from that triple alone, so records can be
replayed from the seed as well as from the embedded instance.
"""
from __future__ import annotations

import hashlib
import json
import random
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Sequence

from .catalog import affine_space, hirzebruch, projective_space
from .exactcore import DomainError, det, primitive
from .fan import Fan, FanMorphism, star_subdivision
from .instance import Instance
from .logpair import ToricLogPair
from .reports import FAIL, INCONCLUSIVE, PASS

GRID = (-12, 18)  # coefficients k/12
FUZZ_SUITES = ("semicont", "maxmld", "adjunction", "preciseinv", "fbc", "bcc", "invadj")
ERROR = "ERROR"


def case_seed(seed: int, suite: str, index: int) -> int:
    h = hashlib.sha256(f"{seed}:{suite}:{index}".encode()).hexdigest()
    return int(h[:12], 16)


def _coeff(rng: random.Random, lo: int, hi: int) -> Fraction:
    return Fraction(rng.randint(lo, hi), 12)


def _vector(rng: random.Random, n: int, r: int = 3) -> tuple[int, ...]:
    while True:
        v = tuple(rng.randint(-r, r) for _ in range(n))
        if any(v):
            return primitive(v)


def random_cone(rng: random.Random, n: int, max_index: int = 60) -> list[tuple[int, ...]]:
    while True:
        rays = [_vector(rng, n) for _ in range(n)]
        d = abs(det([list(u) for u in rays]))
        if 0 < d <= max_index:
            return rays


def _subdivide(rng: random.Random, fan: Fan, steps: int) -> Fan:
    for _ in range(steps):
        for _ in range(20):
            v = _vector(rng, fan.dim)
            if fan.contains(v) and fan.ray_index(v) is None:
                fan = star_subdivision(fan, v)
                break
    return fan


def random_fan(rng: random.Random, n: int) -> Fan:
    """An affine simplicial cone or a weighted-projective fan, then a few star subdivisions."""
    if rng.random() < 0.5:
        rays = random_cone(rng, n)
        fan = Fan.from_cones(n, rays, [tuple(range(n))])
    else:
        w = primitive([-rng.randint(1, 3) for _ in range(n)])
        rays = [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)] + [w]
        cones = [tuple(j for j in range(n + 1) if j != i) for i in range(n + 1)]
        fan = Fan.from_cones(n, rays, cones)
    return _subdivide(rng, fan, rng.randint(0, 3 if n < 4 else 1))


def random_pair(rng: random.Random, n: int, lo: int, hi: int) -> ToricLogPair:
    fan = random_fan(rng, n)
    return ToricLogPair(fan, tuple(_coeff(rng, lo, hi) for _ in fan.rays))


def product_fan(Y: Fan, F: Fan) -> Fan:
    m, k = Y.dim, F.dim
    rays = [tuple(u) + (0,) * k for u in Y.rays] + [(0,) * m + tuple(w) for w in F.rays]
    cones = [tuple(a) + tuple(m_ + len(Y.rays) for m_ in b) for a in Y.maximal for b in F.maximal]
    return Fan.from_cones(m + k, rays, cones)


_BASES = {
    "A1": lambda: affine_space(1).fan,
    "P1": lambda: projective_space(1).fan,
    "A2": lambda: affine_space(2).fan,
    "P1xP1": lambda: hirzebruch(0).fan,
    "P2": lambda: projective_space(2).fan,
}


def random_fibration(rng: random.Random, base_names: Sequence[str], lo: int, hi: int,
                     horizontal_hi: int = 12) -> Instance:
    """``X = Y x P^1`` (or ``X = Y``) refined by star subdivisions, ``f`` the projection."""
    Y = _BASES[rng.choice(list(base_names))]()
    rel = rng.choice((0, 1))
    X = product_fan(Y, projective_space(1).fan) if rel else Y
    X = _subdivide(rng, X, rng.randint(1, 3) if not rel else rng.randint(0, 3))
    M = tuple(tuple(1 if i == j else 0 for j in range(X.dim)) for i in range(Y.dim))
    f = FanMorphism(M, X, Y)
    coeffs = []
    for u in X.rays:
        horizontal = not any(f.apply(u))
        coeffs.append(_coeff(rng, lo, min(hi, horizontal_hi) if horizontal else hi))
    return Instance(ToricLogPair(X, tuple(coeffs)), {}, f, None)


def _finite_cover(rng: random.Random, Y: Fan) -> FanMorphism:
    if Y.dim == 1:
        k = rng.randint(2, 5)
        return FanMorphism(((k,),), Y, Y)
    if Y.rays == projective_space(2).fan.rays:
        return FanMorphism(((2, 0), (0, 2)), Y, Y)
    a, b = rng.choice([(2, 1), (1, 2), (3, 1), (1, 3), (4, 1), (1, 4), (2, 2), (5, 1), (1, 5)])
    return FanMorphism(((a, 0), (0, b)), Y, Y)


def _blowup(rng: random.Random, Y: Fan) -> FanMorphism:
    c = rng.choice([c for c in Y.maximal if len(c) == 2])
    a, b = rng.randint(1, 3), rng.randint(1, 3)
    v = primitive([a * Y.rays[c[0]][t] + b * Y.rays[c[1]][t] for t in range(2)])
    Yp = star_subdivision(Y, v)
    return FanMorphism(((1, 0), (0, 1)), Yp, Y)


def _gen(suite: str, rng: random.Random, dims: Sequence[int]):
    lo, hi = GRID
    if suite in ("semicont", "maxmld"):
        return Instance(random_pair(rng, rng.choice(list(dims)), 0, 12)), {}
    if suite in ("adjunction", "preciseinv"):
        n = rng.choice([d for d in dims if d <= 3] or [2])
        pair = random_pair(rng, n, 0, 12)
        rho = rng.randrange(len(pair.fan.rays))
        coeffs = list(pair.coeffs)
        coeffs[rho] = Fraction(1)
        pair = pair.with_coeffs(coeffs)
        inst = Instance(pair)
        if suite == "adjunction":
            return inst, {"at": str(rho)}
        x = rng.choice([c for c in pair.fan.maximal if rho in c and len(c) == n]
                       or [c for c in pair.fan.maximal if rho in c])
        if len(x) != n:
            return _gen(suite, rng, dims)
        return inst, {"at": ",".join(map(str, x))}
    if suite == "fbc":
        inst = random_fibration(rng, ("A1", "P1", "A2", "P1xP1", "P2"), lo, hi)
        sigma = _finite_cover(rng, inst.morphism.target)
        return Instance(inst.pair, {}, inst.morphism, sigma), {}
    if suite == "bcc":
        inst = random_fibration(rng, ("A2", "P1xP1", "P2"), lo, hi)
        sigma = _blowup(rng, inst.morphism.target)
        return Instance(inst.pair, {}, inst.morphism, sigma), {}
    if suite == "invadj":
        inst = random_fibration(rng, ("A1", "P1", "A2", "P1xP1", "P2"), lo, 12)
        Y = inst.morphism.target
        Z = rng.choice([c for c in Y.cones if c])
        return inst, {"at": ",".join(map(str, Z))}
    raise DomainError(f"no generator for suite {suite!r}")


def regenerate(origin: dict) -> tuple[Instance, dict]:
    rng = random.Random(origin["seed"])
    inst, opts = _gen(origin["suite"], rng, origin["dims"])
    return inst, opts


def evaluate_case(origin: dict) -> dict:
    """Generate and run one case; a pure function of ``origin``."""
    from .commands import run
    from .instance import canonical_json
    from .store import canonical_key, make_record
    inst, opts = regenerate(origin)
    command = f"check:{origin['suite']}"
    try:
        outcome = run(command, inst, opts)
    except DomainError as e:
        return {"origin": origin, "verdict": ERROR, "error": str(e), "instance": canonical_json(inst)}
    rec = make_record(command, inst, opts, outcome, seed=origin["seed"])
    rec["origin"] = origin
    return {"origin": origin, "verdict": outcome.verdict, "record": rec,
            "key": canonical_key(inst) if outcome.verdict == FAIL else None}


def fuzz(seed: int, count: int, dims: Sequence[int] = (2, 3, 4), suites: Sequence[str] = FUZZ_SUITES,
         jobs: int = 1, store=None) -> dict:
    """Run ``count`` cases per suite; returns a deterministic summary.

    Workers only compute; records and counterexamples are written here, in
    case order, by the single calling process.
    """
    dims = sorted(set(int(d) for d in dims))
    origins = [{"suite": s, "seed": case_seed(seed, s, i), "dims": dims}
               for s in suites for i in range(count)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(evaluate_case, origins, chunksize=8))
    else:
        results = [evaluate_case(o) for o in origins]
    counts = {s: {PASS: 0, FAIL: 0, INCONCLUSIVE: 0, ERROR: 0} for s in suites}
    failures, errors = [], []
    digest = hashlib.sha256()
    seen = set()
    for r in results:
        s = r["origin"]["suite"]
        counts[s][r["verdict"]] += 1
        if r["verdict"] == ERROR:
            errors.append({"suite": s, "seed": r["origin"]["seed"], "error": r["error"]})
            digest.update(f"{s}:{r['origin']['seed']}:ERROR:{r['error']}\n".encode())
            continue
        rec = r["record"]
        digest.update(f"{s}:{r['origin']['seed']}:{rec['verdict']}:".encode())
        digest.update(json.dumps(rec["certificates"], sort_keys=True).encode() + b"\n")
        if store is not None:
            store.append(rec)
        if r["verdict"] == FAIL:
            new = r["key"] not in seen
            seen.add(r["key"])
            if store is not None:
                new = store.archive(rec, r["key"]) and new
            failures.append({"suite": s, "seed": r["origin"]["seed"], "new": new,
                             "instance_hash": rec["instance_hash"]})
    return {"seed": seed, "count": count, "dims": dims, "suites": counts,
            "failures": failures, "errors": errors, "digest": digest.hexdigest()}


def summary_text(summary: dict) -> str:
    return json.dumps(summary, sort_keys=True, indent=2) + "\n"
