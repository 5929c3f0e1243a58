"""``lpk`` command line.

Exit codes: 0 computed, 1 usage error, 2 validation failure, 3 FAIL.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .commands import COMMANDS, SUITES, UsageError, run
from .exactcore import DomainError
from .fuzz import FUZZ_SUITES, fuzz, summary_text
from .instance import InstanceError, parse_instance
from .reports import FAIL
from .store import COUNTEREXAMPLES, RECORDS, Store, corpus_dir, make_record, replay

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_FAIL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", required=True, metavar="PATH", help="JSON instance file")
    p.add_argument("--at", metavar="CONE", help="origin, torus or ray indices such as 0,1")
    p.add_argument("--divisor", metavar="NAME", help="named divisor from the instance")
    p.add_argument("--strategy", default="first", help="resolution strategy: first, last, deepest or an integer seed")
    p.add_argument("--out", metavar="DIR", help="append a JSONL record to DIR")


def _dims(text: str) -> list[int]:
    if "-" in text:
        lo, hi = text.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lpk", description="Exact birational invariants of toric log pairs.")
    ap.add_argument("--version", action="version", version=f"lpk {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        _instance_flags(sub.add_parser(name, help=f"compute {name}"))
    chk = sub.add_parser("check", help="run a conjecture suite on one instance")
    chk.add_argument("suite", choices=SUITES)
    _instance_flags(chk)
    fz = sub.add_parser("fuzz", help="seeded random testing with a counterexample corpus")
    fz.add_argument("--seed", type=int, required=True)
    fz.add_argument("--count", type=int, default=100, help="cases per suite")
    fz.add_argument("--dims", type=_dims, default=[2, 3, 4], help="e.g. 2-4 or 2,3")
    fz.add_argument("--suite", action="append", choices=FUZZ_SUITES,
                    help="repeatable; default: all fuzzable suites")
    fz.add_argument("--jobs", type=int, default=1)
    fz.add_argument("--out", metavar="DIR", help="corpus directory (default $LPK_CORPUS_DIR or ./lpk_corpus)")
    rp = sub.add_parser("replay", help="recompute archived records and compare")
    rp.add_argument("--out", metavar="DIR", help="corpus directory (default $LPK_CORPUS_DIR or ./lpk_corpus)")
    return ap


def _table(rows) -> str:
    if not rows:
        return ""
    w = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(w)}  {v}" for k, v in rows) + "\n"


def _compute(args) -> int:
    inst = parse_instance(args.instance)
    command = f"check:{args.suite}" if args.command == "check" else args.command
    options = {"at": args.at, "divisor": args.divisor}
    if args.strategy != "first":
        strategy = int(args.strategy) if args.strategy.lstrip("-").isdigit() else args.strategy
        options["strategy"] = strategy
    outcome = run(command, inst, options)
    sys.stdout.write(_table(outcome.table))
    record = make_record(command, inst, options, outcome)
    if args.out:
        Store(corpus_dir(args.out)).append(record)
    if outcome.verdict == FAIL:
        store = Store(corpus_dir(args.out))
        store.archive(record)
        sys.stdout.write(f"witness archived in {store.root / COUNTEREXAMPLES}\n")
        return EXIT_FAIL
    return EXIT_OK


def _fuzz(args) -> int:
    store = Store(corpus_dir(args.out))
    suites = args.suite or list(FUZZ_SUITES)
    summary = fuzz(args.seed, args.count, args.dims, suites, jobs=args.jobs, store=store)
    sys.stdout.write(summary_text(summary))
    return EXIT_FAIL if summary["failures"] else EXIT_OK


def _replay(args) -> int:
    store = Store(corpus_dir(args.out))
    bad = 0
    total = 0
    for name in (RECORDS, COUNTEREXAMPLES):
        for i, rec in enumerate(store.read(name)):
            total += 1
            same, fresh = replay(rec)
            if not same:
                bad += 1
                sys.stdout.write(f"MISMATCH {name}:{i + 1} {rec['command']} "
                                 f"{rec['verdict']} -> {fresh.get('verdict', fresh.get('reason'))}\n")
    sys.stdout.write(f"replayed {total} records, {bad} mismatches\n")
    return EXIT_FAIL if bad else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fuzz":
            return _fuzz(args)
        if args.command == "replay":
            return _replay(args)
        return _compute(args)
    except UsageError as e:
        sys.stderr.write(f"lpk: usage error: {e}\n")
        return EXIT_USAGE
    except FileNotFoundError as e:
        sys.stderr.write(f"lpk: {e}\n")
        return EXIT_USAGE
    except InstanceError as e:
        for d in e.diagnostics:
            sys.stderr.write(f"{getattr(args, 'instance', '')}:{d}\n")
        return EXIT_INVALID
    except DomainError as e:
        sys.stderr.write(f"lpk: {e}\n")
        return EXIT_INVALID
    except json.JSONDecodeError as e:
        sys.stderr.write(f"lpk: corrupt record store: {e}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
