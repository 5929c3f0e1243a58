"""JSON instance files: parsing with positioned diagnostics, printing, hashing.

An instance is a JSON object::

    {"dim": 2, "rays": [[1,0],[1,3]], "cones": [[0,1]], "coeffs": ["0","0"],
     "divisors": {"D": ["1","0"]},
     "morphism": {"matrix": [[1,0]], "target": {"dim": 1, "rays": [[1]], "cones": [[0]]}},
     "base_change": {"matrix": [[2]], "base": {"dim": 1, "rays": [[1]], "cones": [[0]]}}}

``coeffs`` and divisor values are rationals written as ``"p/q"`` strings or
integers; decimals are rejected.  ``base_change`` maps the fan ``base`` to
the target of ``morphism``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .exactcore import DomainError, format_rat, parse_rat
from .fan import Fan, FanMorphism, validate_fan
from .logpair import ToricLogPair

PAIR_KEYS = {"dim", "rays", "cones", "coeffs", "divisors", "morphism", "base_change"}
FAN_KEYS = {"dim", "rays", "cones"}


@dataclass(frozen=True)
class Diagnostic:
    line: int
    path: str
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.path}: {self.message}"


class InstanceError(DomainError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(map(str, diagnostics)))


@dataclass(frozen=True)
class Instance:
    pair: ToricLogPair
    divisors: dict = field(default_factory=dict)
    morphism: FanMorphism | None = None
    base_change: FanMorphism | None = None

    @property
    def fan(self) -> Fan:
        return self.pair.fan


class _Locator:
    """Maps a JSON path to a best-effort line number in the source text."""

    def __init__(self, text: str):
        self.lines = text.splitlines() or [""]

    def find(self, key: str | None, literal: str | None = None, start: int = 0) -> int:
        i = start
        if key is not None:
            needle = f'"{key}"'
            i = next((k for k in range(start, len(self.lines)) if needle in self.lines[k]), start)
        if literal is not None:
            i = next((k for k in range(i, len(self.lines)) if literal in self.lines[k]), i)
        return i + 1


class _Parser:
    def __init__(self, text: str):
        self.loc = _Locator(text)
        self.diags: list[Diagnostic] = []

    def error(self, path: str, message: str, key: str | None = None, literal: str | None = None):
        self.diags.append(Diagnostic(self.loc.find(key, literal), path, message))

    def check_keys(self, obj, allowed, path):
        if not isinstance(obj, dict):
            self.error(path, "expected an object")
            return False
        for k in obj:
            if k not in allowed:
                self.error(f"{path}.{k}" if path else k, "unknown field", key=k)
        for k in ("dim", "rays", "cones"):
            if k not in obj:
                self.error(path or "$", f"missing field {k!r}")
        return not self.diags

    def int_matrix(self, rows, path, key, width=None):
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            self.error(path, "expected a list of integer lists", key=key)
            return None
        for r in rows:
            if not all(isinstance(x, int) and not isinstance(x, bool) for x in r):
                self.error(path, f"non-integer entry in {r}", key=key)
                return None
            if width is not None and len(r) != width:
                self.error(path, f"{r} has length {len(r)}, expected {width}", key=key)
                return None
        return rows

    def rationals(self, values, path, key, count):
        if isinstance(values, dict):
            out = [Fraction(0)] * count
            for k, v in values.items():
                if not (isinstance(k, str) and k.isdigit() and int(k) < count):
                    self.error(f"{path}.{k}", "not a ray index", key=key)
                    continue
                q = self.rational(v, f"{path}.{k}", key)
                if q is not None:
                    out[int(k)] = q
            return tuple(out)
        if not isinstance(values, list) or len(values) != count:
            self.error(path, f"expected {count} rationals", key=key)
            return None
        out = [self.rational(v, f"{path}[{i}]", key) for i, v in enumerate(values)]
        return None if any(q is None for q in out) else tuple(out)

    def rational(self, v, path, key):
        if isinstance(v, bool) or isinstance(v, float):
            self.error(path, f"{v!r} is not an exact rational (use \"p/q\")", key=key, literal=repr(v))
            return None
        try:
            return parse_rat(v)
        except (DomainError, ValueError, TypeError) as e:
            self.error(path, str(e), key=key, literal=str(v))
            return None

    def fan(self, obj, path, keys) -> Fan | None:
        if not self.check_keys(obj, keys, path):
            return None
        dim = obj["dim"]
        if not isinstance(dim, int) or dim < 1:
            self.error(f"{path}.dim" if path else "dim", "dim must be a positive integer", key="dim")
            return None
        rays = self.int_matrix(obj["rays"], f"{path}.rays" if path else "rays", "rays", dim)
        cones = self.int_matrix(obj["cones"], f"{path}.cones" if path else "cones", "cones")
        if rays is None or cones is None:
            return None
        try:
            fan = Fan.from_cones(dim, rays, cones)
        except DomainError as e:
            self.error(path or "$", str(e), key="cones")
            return None
        for problem in validate_fan(fan):
            self.error(f"{path}.cones" if path else "cones", problem, key="cones")
        return None if self.diags else fan

    def morphism(self, obj, path, inner_key: str, inner_keys):
        if not isinstance(obj, dict) or set(obj) != {"matrix", inner_key}:
            self.error(path, f"expected exactly the fields 'matrix' and {inner_key!r}", key=path)
            return None
        other = self.fan(obj[inner_key], f"{path}.{inner_key}", inner_keys)
        if other is None:
            return None
        return other, obj["matrix"]


def parse_instance_text(text: str) -> Instance:
    p = _Parser(text)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError([Diagnostic(e.lineno, "$", e.msg)]) from None
    fan = p.fan(data, "", PAIR_KEYS)
    if fan is None:
        raise InstanceError(p.diags)
    coeffs = p.rationals(data.get("coeffs", ["0"] * len(fan.rays)), "coeffs", "coeffs", len(fan.rays))
    divisors = {}
    raw_divs = data.get("divisors", {})
    if not isinstance(raw_divs, dict):
        p.error("divisors", "expected an object of named divisors", key="divisors")
    else:
        for name, vals in raw_divs.items():
            d = p.rationals(vals, f"divisors.{name}", name, len(fan.rays))
            if d is not None:
                divisors[name] = d
    if p.diags:
        raise InstanceError(p.diags)
    pair = ToricLogPair(fan, coeffs)
    morphism = base_change = None
    if "morphism" in data:
        got = p.morphism(data["morphism"], "morphism", "target", FAN_KEYS)
        if got is not None:
            target, M = got
            M = p.int_matrix(M, "morphism.matrix", "matrix", fan.dim)
            if M is not None:
                morphism = _build(p, M, fan, target, "morphism")
    if "base_change" in data:
        if morphism is None and not p.diags:
            p.error("base_change", "a base change needs a morphism", key="base_change")
        elif morphism is not None:
            got = p.morphism(data["base_change"], "base_change", "base", FAN_KEYS)
            if got is not None:
                base, M = got
                M = p.int_matrix(M, "base_change.matrix", "matrix", base.dim)
                if M is not None:
                    base_change = _build(p, M, base, morphism.target, "base_change")
    if p.diags:
        raise InstanceError(p.diags)
    return Instance(pair, divisors, morphism, base_change)


def _build(p: _Parser, M, source: Fan, target: Fan, path: str) -> FanMorphism | None:
    try:
        f = FanMorphism(tuple(tuple(r) for r in M), source, target)
    except DomainError as e:
        p.error(f"{path}.matrix", str(e), key=path)
        return None
    if not f.is_compatible:
        p.error(f"{path}.matrix", "the lattice map does not send cones into cones", key=path)
        return None
    return f


def parse_instance(path: str | Path) -> Instance:
    return parse_instance_text(Path(path).read_text())


def _fan_json(fan: Fan) -> dict:
    return {"dim": fan.dim, "rays": [list(u) for u in fan.rays], "cones": [list(c) for c in fan.maximal]}


def instance_to_json(inst: Instance) -> dict:
    out = _fan_json(inst.fan)
    out["coeffs"] = [format_rat(b) for b in inst.pair.coeffs]
    if inst.divisors:
        out["divisors"] = {k: [format_rat(x) for x in v] for k, v in sorted(inst.divisors.items())}
    if inst.morphism is not None:
        out["morphism"] = {"matrix": [list(r) for r in inst.morphism.matrix],
                           "target": _fan_json(inst.morphism.target)}
    if inst.base_change is not None:
        out["base_change"] = {"matrix": [list(r) for r in inst.base_change.matrix],
                              "base": _fan_json(inst.base_change.source)}
    return out


def canonical_json(inst: Instance) -> str:
    return json.dumps(instance_to_json(inst), sort_keys=True, separators=(",", ":"))


def print_instance(inst: Instance) -> str:
    return json.dumps(instance_to_json(inst), indent=2, sort_keys=True) + "\n"


def instance_hash(inst: Instance) -> str:
    return hashlib.sha256(canonical_json(inst).encode()).hexdigest()[:16]


def normalized(inst: Instance) -> Instance:
    """The instance as it reads back from its printed form (maximal cones only)."""
    return parse_instance_text(print_instance(inst))
