"""Append-only JSONL result store, counterexample corpus and replay."""
from __future__ import annotations

import datetime as _dt
import json
import os
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .commands import run
from .exactcore import hermite_normal_form, transpose
from .instance import Instance, canonical_json, instance_hash, instance_to_json, parse_instance_text

SCHEMA = 1
RECORDS = "records.jsonl"
COUNTEREXAMPLES = "counterexamples.jsonl"
ENV_DIR = "LPK_CORPUS_DIR"


def corpus_dir(out: str | os.PathLike | None = None) -> Path:
    if out:
        return Path(out)
    return Path(os.environ.get(ENV_DIR) or "lpk_corpus")


def make_record(command: str, inst: Instance, options: dict, outcome, seed=None) -> dict:
    return {
        "schema": SCHEMA,
        "command": command,
        "instance_hash": instance_hash(inst),
        "instance": instance_to_json(inst),
        "options": {k: v for k, v in sorted(options.items()) if v is not None},
        "seed": seed,
        "verdict": outcome.verdict,
        "certificates": outcome.payload,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def canonical_key(inst: Instance) -> str:
    """Dedupe key: Hermite form of the ray matrix (columns = rays), cones and coefficients.

    Two instances whose ray matrices differ by a unimodular change of lattice
    basis get the same Hermite form, hence the same key.
    """
    fan = inst.fan
    H, _ = hermite_normal_form(transpose([list(u) for u in fan.rays]))
    key = {"hnf": [[int(x) for x in row] for row in H], "cones": [list(c) for c in fan.maximal],
           "coeffs": instance_to_json(inst)["coeffs"]}
    if inst.morphism is not None:
        key["morphism"] = instance_to_json(inst)["morphism"]
    return json.dumps(key, sort_keys=True, separators=(",", ":"))


@dataclass
class Store:
    """Single-writer JSONL store rooted at a corpus directory."""
    root: Path

    def __post_init__(self):
        self.root = Path(self.root)

    def _append(self, name: str, record: dict) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        with open(self.root / name, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")

    def append(self, record: dict) -> None:
        self._append(RECORDS, record)

    def archive(self, record: dict, key: str | None = None) -> bool:
        """Add a counterexample unless one with the same canonical key is present."""
        if key is None:
            key = canonical_key(parse_instance_text(json.dumps(record["instance"])))
        if key in {r.get("key") for r in self.read(COUNTEREXAMPLES)}:
            return False
        self._append(COUNTEREXAMPLES, dict(record, key=key))
        return True

    def read(self, name: str = RECORDS) -> list[dict]:
        path = self.root / name
        if not path.exists():
            return []
        with open(path, encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]


def replay(record: dict) -> tuple[bool, dict]:
    """Recompute a record from its embedded instance and options.

    Returns ``(same, fresh_record_fields)``; ``same`` requires the verdict and
    the certificates to match exactly.
    """
    if record.get("schema") != SCHEMA:
        raise ValueError(f"unsupported record schema {record.get('schema')!r}")
    inst = parse_instance_text(json.dumps(record["instance"]))
    if instance_hash(inst) != record["instance_hash"]:
        return False, {"reason": "instance hash mismatch"}
    if record.get("origin") is not None:
        from .fuzz import regenerate
        regen, opts = regenerate(record["origin"])
        if canonical_json(regen) != canonical_json(inst) or opts != record["options"]:
            return False, {"reason": "seeded generator no longer reproduces the instance"}
    outcome = run(record["command"], inst, dict(record["options"]))
    fresh = {"verdict": outcome.verdict, "certificates": outcome.payload}
    same = fresh["verdict"] == record["verdict"] and \
        json.dumps(fresh["certificates"], sort_keys=True) == json.dumps(record["certificates"], sort_keys=True)
    return same, fresh
