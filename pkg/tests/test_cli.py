import io
import json
from pathlib import Path

import jsonschema
import pytest

from dp4brauer import FIXTURES
from dp4brauer.cli import main

GOLDEN = Path(__file__).parent / "golden"
SCHEMA = json.loads((FIXTURES.parent / "report.schema.json").read_text())


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("name", ["dp4-k", "dp4-L", "toy-split"])
@pytest.mark.parametrize("fmt", ["text", "json"])
def test_golden_reports(name, fmt, monkeypatch):
    expected = (GOLDEN / f"{name}.{'txt' if fmt == 'text' else 'json'}").read_text()
    outputs = set()
    for threads in ("1", "4"):
        monkeypatch.setenv("DP4_THREADS", threads)
        code, out, _ = run("analyze", FIXTURES / f"{name}.pencil", "--format", fmt)
        assert code == 0
        outputs.add(out)
    assert outputs == {expected}


def test_explicit_thread_flag_matches_golden():
    code, out, _ = run("analyze", FIXTURES / "dp4-k.pencil", "--threads", "3")
    assert code == 0 and out == (GOLDEN / "dp4-k.txt").read_text()


def test_base_field_run_on_extension_file():
    code, out, _ = run("analyze", FIXTURES / "dp4-L.pencil", "--field", "k")
    assert code == 0 and out == (GOLDEN / "dp4-L.field-k.txt").read_text()


@pytest.mark.parametrize("name", ["dp4-k", "dp4-L", "toy-split"])
def test_json_matches_schema(name):
    report = json.loads((GOLDEN / f"{name}.json").read_text())
    jsonschema.validate(report, SCHEMA)
    assert report["schema"] == "dp4brauer.report/1"
    kinds = {c["provenance"]["kind"] for s in report["stages"] for c in s["claims"]}
    assert kinds <= {"computed", "check", "cited"}


def test_h1_verb():
    code, out, _ = run("h1", FIXTURES / "dp4-k.pencil", "--format", "json")
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    assert report["stages"][-1]["stage"] == "h1"
    claims = {c["id"]: c["value"] for c in report["stages"][-1]["claims"]}
    assert claims["full"] == "Z/2" and claims["two_torsion"] == "Z/2"


def test_verify_trace_verb():
    code, out, _ = run("verify-trace", FIXTURES / "dp4-L.pencil")
    assert code == 0
    assert "final: (c, b)" in out and "[check] accepted: yes" in out
    code, _, err = run("verify-trace", FIXTURES / "dp4-k.pencil")
    assert code == 2 and "certificates" in err


def test_residues_verb():
    code, out, _ = run("residues", FIXTURES / "dp4-L.pencil", "--at", "sqrt(a)", "--at", "sqrt(a) -> c")
    assert code == 0
    assert out == ("symbol: (c, b)\n"
                   "residue at sqrt(a): 1 (trivial) in Q^cycl(b,c)\n"
                   "residue at sqrt(a) -> c: b (nontrivial) in Q^cycl(b)\n")
    code, out, _ = run("residues", FIXTURES / "dp4-L.pencil", "--at", "sqrt(a) -> c", "--format", "json")
    assert json.loads(out)["residues"] == [
        {"at": "sqrt(a) -> c", "class": "b", "trivial": False, "residue_field": "Q^cycl(b)"}]
    code, _, err = run("residues", FIXTURES / "dp4-k.pencil", "--at", "c")
    assert code == 2


def test_invalid_inputs_exit_2(tmp_path):
    assert run("analyze", tmp_path / "missing.pencil")[0] == 2
    bad = tmp_path / "bad.pencil"
    bad.write_text((FIXTURES / "dp4-k.pencil").read_text().replace("diag = a, b, 1, 0, c", "diag = a, b, 1, 0"))
    code, _, err = run("analyze", bad)
    assert code == 2 and "line 10" in err
    assert run("analyze", FIXTURES / "dp4-k.pencil", "--field", "L")[0] == 2


def test_rejected_certificate_exits_3(tmp_path):
    text = (FIXTURES / "dp4-L.pencil").read_text()
    tampered = tmp_path / "tampered.pencil"
    tampered.write_text(text.replace("k = 4*a", "k = 4*b"))
    code, out, err = run("analyze", tampered)
    assert code == 3
    code, _, _ = run("verify-trace", tampered)
    assert code == 3


def test_singular_pencil_exits_3(tmp_path):
    sing = tmp_path / "sing.pencil"
    sing.write_text("[field]\nparams = t\n[quadric.Q]\ndiag = 1, 1, 1, 1, 1\n"
                    "[quadric.Q2]\ndiag = 1, 1, 3, 4, 5\n")
    code, _, err = run("analyze", sing)
    assert code == 3 and "error" in err
