"""Verdicts and JSON-friendly conversion of exact values."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .exactcore import format_rat

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class ConjectureReport:
    name: str
    verdict: str
    witness: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict,
            "witness": jsonable(self.witness),
            "certificates": jsonable(self.certificates),
            "notes": list(self.notes),
        }


def jsonable(obj: Any) -> Any:
    """Convert Fractions (as "p/q"), infinities, tuples and dataclasses to JSON data."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return format_rat(obj)
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        raise TypeError("floating point values are not part of the exact contract")
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): jsonable(v)
                for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    if dataclasses.is_dataclass(obj):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if f.repr}
    return str(obj)
