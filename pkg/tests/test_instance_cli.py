import json
from fractions import Fraction

import pytest

from lpk.catalog import affine_space
from lpk.cli import EXIT_FAIL, EXIT_INVALID, EXIT_OK, EXIT_USAGE, main
from lpk.instance import (
    Instance, InstanceError, canonical_json, instance_hash, instance_to_json, parse_instance_text,
    print_instance,
)
from lpk.store import COUNTEREXAMPLES, RECORDS, Store

A1_QUOTIENT = {"dim": 2, "rays": [[0, 1], [3, -1]], "cones": [[0, 1]], "coeffs": ["0", "0"]}
MULT = {"dim": 2, "rays": [[1, 0], [0, 1]], "cones": [[0, 1]], "coeffs": ["1/2", "3/4"],
        "morphism": {"matrix": [[1, 1]], "target": {"dim": 1, "rays": [[1]], "cones": [[0]]}}}
NEGATIVE_POINT = {"dim": 1, "rays": [[1]], "cones": [[0]], "coeffs": ["-1"]}
P2_LINE = {"dim": 2, "rays": [[1, 0], [0, 1], [-1, -1]], "cones": [[0, 1], [1, 2], [0, 2]],
           "coeffs": [0, 0, 0], "divisors": {"H": [0, 0, 1]}}


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj, indent=1))
    return str(p)


def test_round_trip_is_stable():
    for obj in (A1_QUOTIENT, MULT, P2_LINE):
        inst = parse_instance_text(json.dumps(obj))
        again = parse_instance_text(print_instance(inst))
        assert canonical_json(again) == canonical_json(inst)
        assert instance_hash(again) == instance_hash(inst)
        assert parse_instance_text(json.dumps(instance_to_json(inst))).pair == inst.pair


def test_divisor_map_form():
    obj = dict(P2_LINE, divisors={"H": {"2": "1"}})
    inst = parse_instance_text(json.dumps(obj))
    assert inst.divisors["H"] == (0, 0, 1)


def test_decimal_rejected_with_line_number():
    text = '{\n "dim": 2,\n "rays": [[1, 0], [0, 1]],\n "coeffs": ["0.5", "0"],\n "cones": [[0, 1]]\n}'
    with pytest.raises(InstanceError) as e:
        parse_instance_text(text)
    d = e.value.diagnostics[0]
    assert d.line == 4 and "coeffs" in d.path


def test_float_and_unknown_field_rejected():
    with pytest.raises(InstanceError):
        parse_instance_text(json.dumps(dict(A1_QUOTIENT, coeffs=[0.5, 0])))
    with pytest.raises(InstanceError) as e:
        parse_instance_text(json.dumps(dict(A1_QUOTIENT, colour="red")))
    assert "colour" in str(e.value)


def test_overlapping_cones_point_at_the_cones_line():
    text = '{\n "dim": 2, "rays": [[1, 0], [0, 1], [1, 1]],\n "cones": [[0, 1], [0, 2]]\n}'
    with pytest.raises(InstanceError) as e:
        parse_instance_text(text)
    d = e.value.diagnostics[0]
    assert d.line == 3 and "overlap" in d.message


def test_incompatible_morphism_rejected():
    bad = dict(MULT, morphism={"matrix": [[1, -1]], "target": {"dim": 1, "rays": [[1]], "cones": [[0]]}})
    with pytest.raises(InstanceError):
        parse_instance_text(json.dumps(bad))


def test_cli_mld(tmp_path, capsys):
    path = _write(tmp_path, "q.json", A1_QUOTIENT)
    assert main(["mld", "--instance", path]) == EXIT_OK
    out = capsys.readouterr().out
    assert "2/3" in out and "[1, 0]" in out.replace("(", "[").replace(")", "]")


def test_cli_disc_table(tmp_path, capsys):
    path = _write(tmp_path, "m.json", MULT)
    assert main(["disc", "--instance", path]) == EXIT_OK
    assert "3/4" in capsys.readouterr().out


def test_cli_bld_and_checks(tmp_path, capsys):
    path = _write(tmp_path, "p2.json", P2_LINE)
    assert main(["bld", "--instance", path, "--divisor", "H", "--at", "0,1"]) == EXIT_OK
    assert "invariant bld >= bld" in capsys.readouterr().out
    assert main(["check", "fujita", "--instance", path, "--divisor", "H"]) == EXIT_OK
    assert main(["check", "quadbound", "--instance", path, "--divisor", "H"]) == EXIT_OK
    mult = _write(tmp_path, "m.json", MULT)
    for suite in ("fbc", "invadj"):
        assert main(["check", suite, "--instance", mult]) == EXIT_OK


def test_cli_fail_archives_counterexample(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LPK_CORPUS_DIR", str(tmp_path / "corpus"))
    path = _write(tmp_path, "neg.json", NEGATIVE_POINT)
    assert main(["check", "semicont", "--instance", path]) == EXIT_FAIL
    assert "witness archived" in capsys.readouterr().out
    rows = Store(tmp_path / "corpus").read(COUNTEREXAMPLES)
    assert len(rows) == 1 and rows[0]["verdict"] == "FAIL"
    # the same counterexample is not archived twice
    assert main(["check", "semicont", "--instance", path]) == EXIT_FAIL
    assert len(Store(tmp_path / "corpus").read(COUNTEREXAMPLES)) == 1


def test_cli_out_and_replay(tmp_path, capsys):
    out = str(tmp_path / "store")
    q = _write(tmp_path, "q.json", A1_QUOTIENT)
    m = _write(tmp_path, "m.json", MULT)
    assert main(["mld", "--instance", q, "--out", out]) == EXIT_OK
    assert main(["disc", "--instance", m, "--out", out]) == EXIT_OK
    assert len(Store(out).read(RECORDS)) == 2
    capsys.readouterr()
    assert main(["replay", "--out", out]) == EXIT_OK
    assert "replayed 2 records, 0 mismatches" in capsys.readouterr().out


def test_cli_replay_detects_tampering(tmp_path, capsys):
    out = tmp_path / "store"
    q = _write(tmp_path, "q.json", A1_QUOTIENT)
    assert main(["mld", "--instance", q, "--out", str(out)]) == EXIT_OK
    rec = json.loads((out / RECORDS).read_text())
    rec["verdict"] = "FAIL"
    (out / RECORDS).write_text(json.dumps(rec) + "\n")
    assert main(["replay", "--out", str(out)]) == EXIT_FAIL
    assert "MISMATCH" in capsys.readouterr().out


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["mld", "--instance", str(tmp_path / "missing.json")]) == EXIT_USAGE
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == EXIT_USAGE
    bad = _write(tmp_path, "bad.json", '{"dim": 2, "rays": [[1, 0]], "cones": [[0]], "coeffs": ["1.5"]}')
    assert main(["mld", "--instance", bad]) == EXIT_INVALID
    assert "line" in capsys.readouterr().err
    q = _write(tmp_path, "q.json", A1_QUOTIENT)
    assert main(["mld", "--instance", q, "--at", "7"]) in (EXIT_USAGE, EXIT_INVALID)
    # diff along a ray that is not an lc center is a domain error
    assert main(["diff", "--instance", q]) == EXIT_INVALID


def test_instance_dataclass():
    inst = Instance(affine_space(2, (Fraction(1, 2), 0)))
    assert inst.fan.dim == 2 and inst.morphism is None
