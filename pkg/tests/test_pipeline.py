import pytest

from dp4brauer import FIXTURES
from dp4brauer.parsing import ValidationError, parse_pencil, parse_pencil_text
from dp4brauer.pipeline import STAGES, StageError, analyze, residue_chain, thread_count


@pytest.fixture(scope="module")
def spec_L():
    return parse_pencil(FIXTURES / "dp4-L.pencil")


@pytest.fixture(scope="module")
def report_L(spec_L):
    return analyze(spec_L)


def test_all_stages_present(report_L):
    assert [s.name for s in report_L.stages] == list(STAGES)
    assert report_L.ok
    assert not any(s.skipped for s in report_L.stages)


def test_stage_values(report_L):
    r = report_L
    assert r.stage("locus").get("atoms") == ["a", "b", "c", "b - 1", "-a + b*c", "-a + b**2*c"]
    assert r.stage("star").get("subschemes") == ["{T0,T1}"]
    assert r.stage("galois").get("order") == 8
    assert r.stage("h1").get("full") == "Z/2"
    assert r.stage("h1").get("base_field_two_torsion") == "Z/2"
    assert r.stage("cocycles").get("{T0,T1}.witnesses") == ["T2", "T3", "T4"]
    assert r.stage("trace").get("final") == "(c, b)"
    res = r.stage("residues").claims
    assert [(c.id, c.value["class"], c.value["trivial"]) for c in res] == [
        ("sqrt(a)", "1", True), ("sqrt(a) -> c", "b", False)]


def test_provenance(report_L):
    for s in report_L.stages:
        for c in s.claims:
            assert c.operation
            assert c.kind in ("computed", "check", "cited")
    cited = [c for s in report_L.stages for c in s.claims if c.kind == "cited"]
    assert [c.id for c in cited] == ["Br X / Br k trivial"]
    assert cited[0].note


def test_stop_after(spec_L):
    r = analyze(spec_L, stop_after="galois")
    assert [s.name for s in r.stages] == ["pencil", "locus", "star", "galois"]
    with pytest.raises(ValueError):
        analyze(spec_L, stop_after="nope")


def test_base_field_skips_algebra(spec_L):
    r = analyze(spec_L, "k")
    assert r.stage("algebra").skipped and r.stage("algebra").notes
    assert r.stage("h1").get("full") == "Z/2"
    assert not any(c.kind == "cited" for s in r.stages for c in s.claims)


def test_thread_count(monkeypatch):
    monkeypatch.delenv("DP4_THREADS", raising=False)
    assert thread_count() == 1
    monkeypatch.setenv("DP4_THREADS", "6")
    assert thread_count() == 6 and thread_count(2) == 2
    monkeypatch.setenv("DP4_THREADS", "many")
    assert thread_count() == 1


def test_stage_error_is_labelled():
    spec = parse_pencil_text("[field]\nparams = t\n[quadric.Q]\ndiag = 1, 1, 1, 1, 1\n"
                             "[quadric.Q2]\ndiag = 1, 1, 3, 4, 5\n")
    with pytest.raises(StageError) as e:
        analyze(spec)
    assert e.value.stage == "pencil"


def test_residue_chain(report_L):
    final = report_L.data["verification"].final
    r, fld = residue_chain(final, ["sqrt(a)", "c"])
    assert str(r) == "b" and str(fld) == "Q^cycl(b)"


def test_unknown_field_selector(spec_L):
    with pytest.raises(ValidationError):
        analyze(spec_L, "M")
