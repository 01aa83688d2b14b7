import json

import pytest

from megs.chains import ChainStore
from megs.checks import (
    CHECK_NAMES,
    REFUTED,
    VERIFIED,
    CheckError,
    run_check,
    run_suite,
    suite_plan,
)
from megs.datum import NumericalDatum

GS = NumericalDatum.from_text("p = 3; E1 = (1, 2)")
S22 = NumericalDatum.from_text("p = 3; E1 = (2, 2)")
DEP = NumericalDatum.from_text("p = 3; E1 = (1, 2); E2 = (1, 2)")
CONST = NumericalDatum.from_text("p = 3; E1 = (1, 1); E2 = (1, 1)")
P5E = NumericalDatum.from_text("p = 5; E1 = (1, 0, 0, 1); E2 = (0, 1, 1, 0)")

STORE = ChainStore()


def run(name, datum, **kw):
    kw.setdefault("store", STORE)
    return run_check(name, datum, **kw)


def test_unknown_check_rejected():
    with pytest.raises(CheckError):
        run("no-such-check", GS)


def test_abelianization_index_verdicts():
    r = run("abelianization-index", GS, level=3)
    assert r.verdict == VERIFIED and r.expected == VERIFIED
    assert r.certificates["measured-exponent"] == 2
    assert r.certificates["predicted-exponent"] == 2
    r = run("abelianization-index", DEP, level=3)
    assert r.verdict == REFUTED and r.expected == REFUTED
    assert r.as_predicted
    assert r.certificates["measured-exponent"] < r.certificates["predicted-exponent"]
    r = run("abelianization-index", CONST, level=3)
    assert r.verdict == VERIFIED and r.expected == VERIFIED
    assert r.certificates["measured-exponent"] == 3


def test_branch_over_derived_verdicts():
    r = run("branch-over-derived", GS, level=3)
    assert r.verdict == VERIFIED and r.expected == VERIFIED
    p5s = NumericalDatum.from_text("p = 5; E1 = (1, 0, 0, 1)")
    for datum in (S22, p5s):
        r = run("branch-over-derived", datum, level=3)
        assert r.verdict == REFUTED and r.expected == REFUTED
        assert "witness" in r.certificates


def test_branch_over_gamma3_levels():
    r = run("branch-over-gamma3", S22, level=3)
    assert r.verdict == VERIFIED and r.expected == VERIFIED
    r = run("branch-over-gamma3", S22, level=4)
    assert r.verdict == REFUTED and r.expected == REFUTED
    assert r.certificates["failed-pivot-count"] == 4
    with pytest.raises(CheckError):
        run("branch-over-gamma3", CONST, level=3)


def test_second_derived_and_st1():
    assert run("second-derived", GS, level=3).verdict == VERIFIED
    assert run("st1-derived-in-gamma3", S22, level=3).verdict == VERIFIED
    r = run("st1-derived-in-gamma3", P5E, level=2)
    assert r.verdict == VERIFIED
    assert r.notes


def test_subdirect_verdicts():
    assert run("subdirect", GS, level=3).verdict == VERIFIED
    r = run("subdirect", S22, level=3)
    assert r.verdict == REFUTED and r.expected == REFUTED
    assert r.certificates["deficient-coordinates"] == [1, 2, 3]
    with pytest.raises(CheckError):
        run("subdirect", CONST, level=3)


def test_csp_positive():
    r = run("csp-positive", GS, level=None)
    assert r.verdict == VERIFIED and r.level == 3
    with pytest.raises(CheckError):
        run("csp-positive", DEP)


def test_csp_witness_dependent_certificates():
    r = run("csp-witness-dependent", DEP, level=3, aux_level=5)
    assert r.verdict == VERIFIED and r.as_predicted
    certs = r.certificates
    assert certs["agrees-to-level"] is True
    assert certs["classes-differ"] is True
    assert certs["factor-coset-in-derived"] is True
    assert certs["defect-in-level-kernel"] is True
    assert certs["defect-in-derived"] is True
    assert tuple(certs["abelianization-target"]) != tuple(certs["abelianization-factor"])
    assert any("defect" in note for note in r.notes)


def test_csp_witness_dependent_requires_dependency():
    with pytest.raises(CheckError):
        run("csp-witness-dependent", GS, level=3)


def test_csp_witness_exceptional_rejects_p3():
    with pytest.raises(CheckError) as info:
        run("csp-witness-exceptional", GS, level=2)
    assert "exceptional class is empty for p = 3" in str(info.value)


def test_fractality_levels():
    r = run("fractality", S22, level=3)
    assert r.verdict == VERIFIED and r.expected == VERIFIED
    r = run("fractality", CONST, level=4)
    assert r.verdict == REFUTED and r.expected == REFUTED
    cert = r.certificates["first-defect"]
    assert cert["k"] == 2
    assert cert["full-exponent"] - cert["section-exponent"] == 1


def test_constant_vector_check():
    r = run("constant-vector", CONST, level=3, seed=11, samples=5)
    assert r.verdict == VERIFIED
    assert r.certificates["index-exponent"] == 1
    assert r.certificates["contains-derived"] is True
    with pytest.raises(CheckError):
        run("constant-vector", GS, level=3)


def test_full_section_vertex_and_blocks():
    r = run("full-section-vertex", GS, word="a", level=2)
    assert r.verdict == VERIFIED
    assert r.certificates["vertex"] == [1]
    r = run("normal-closure-blocks", GS, word="a", level=4)
    assert r.verdict == VERIFIED
    with pytest.raises(CheckError):
        run("full-section-vertex", GS)


def test_weak_csp():
    r = run("weak-csp", GS, level=1)
    assert r.verdict == VERIFIED and r.expected == VERIFIED
    r = run("weak-csp", S22, level=1)
    assert r.verdict == REFUTED and r.expected is None
    assert r.as_predicted


def test_report_text_and_json_shapes():
    r = run("abelianization-index", GS, level=3)
    text = r.to_text()
    assert text == r.to_text()
    assert "check: abelianization-index" in text
    assert "verdict: Verified" in text
    data = json.loads(json.dumps(r.to_json()))
    assert data["check"] == "abelianization-index"
    assert data["as_predicted"] is True
    assert data["datum"] == GS.canonical_line()


def test_suite_plan_shape():
    rows = suite_plan()
    names = {row[0] for row in rows}
    assert "single-12" in names and "p5-exceptional" in names
    checks = {row[2] for row in rows if row[0] == "single-12"}
    assert "full-section-vertex" in checks
    assert "constant-vector" not in checks
    const_checks = {row[2] for row in rows if row[0] == "constant-pair"}
    assert "constant-vector" in const_checks
    assert "branch-over-gamma3" not in const_checks
    for row in rows:
        assert row[2] in CHECK_NAMES
        assert isinstance(row[3], dict)


def test_suite_rows_for_one_datum_run_as_predicted():
    rows = [row for row in suite_plan() if row[0] == "single-01"]
    assert len(rows) == 8
    for _, text, check, kwargs in rows:
        datum = NumericalDatum.from_text(text)
        report = run_check(check, datum, store=STORE, **kwargs)
        assert report.as_predicted, (check, report.verdict, report.expected)
