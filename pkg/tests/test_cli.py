import json

from megs.cli import main

GS = "p = 3; E1 = (1, 2)"
S22 = "p = 3; E1 = (2, 2)"
DEP = "p = 3; E1 = (1, 2); E2 = (1, 2)"
CONST = "p = 3; E1 = (1, 1); E2 = (1, 1)"


def test_classify_output(capsys):
    code = main(["classify", "--datum", GS])
    out = capsys.readouterr().out
    assert code == 0
    assert "constant-class: no" in out
    assert "torsion: yes" in out
    assert "csp: HasCSP" in out
    assert "branch-over-derived: yes" in out
    assert "non-symmetric" in out


def test_classify_constant_pair(capsys):
    code = main(["classify", "--datum", CONST])
    out = capsys.readouterr().out
    assert code == 0
    assert "constant-class: yes" in out
    assert "torsion: no" in out


def test_quotient_orders(capsys):
    code = main(["quotient", "--datum", GS, "--level", "3"])
    out = capsys.readouterr().out
    assert code == 0
    assert "order: 3^7" in out
    lines = [line for line in out.splitlines() if line.lstrip().startswith("k=")]
    assert lines == [
        "  k=1: quotient 3^1, kernel 3^6, layer 3^1",
        "  k=2: quotient 3^3, kernel 3^4, layer 3^2",
        "  k=3: quotient 3^7, kernel 3^0, layer 3^4",
    ]


def test_order_command(capsys):
    code = main(["order", "--datum", GS, "a b[1,1]", "--cap", "64"])
    out = capsys.readouterr().out
    assert code == 0
    assert "order: 9" in out


def test_order_exceeds_cap(capsys):
    code = main(["order", "--datum", CONST, "a b[1,1]", "--cap", "729"])
    out = capsys.readouterr().out
    assert code == 0
    assert "exceeds cap 729" in out


def test_check_verified_exit_zero(capsys):
    code = main(["check", "branch-over-derived", "--datum", GS, "--level", "3"])
    out = capsys.readouterr().out
    assert code == 0
    assert "verdict: Verified" in out
    assert "as-predicted: yes" in out


def test_check_predicted_refutation_exits_zero(capsys):
    code = main(["check", "abelianization-index", "--datum", DEP, "--level", "3"])
    out = capsys.readouterr().out
    assert code == 0
    assert "verdict: RefutedByWitness" in out
    assert "as-predicted: yes" in out


def test_check_precondition_error_exits_three(capsys):
    code = main(["check", "csp-witness-exceptional", "--datum", GS])
    err = capsys.readouterr().err
    assert code == 3
    assert "exceptional class is empty" in err


def test_bad_datum_exits_three(capsys):
    code = main(["classify", "--datum", "p = 4; E1 = (1, 2)"])
    assert code == 3
    code = main(["check", "subdirect"])
    assert code == 3


def test_unknown_subcommand_exits_three(capsys):
    assert main(["frobnicate"]) == 3


def test_degree_guard_exits_two(capsys):
    code = main(["quotient", "--datum", GS, "--level", "5", "--modulus-guard", "100"])
    err = capsys.readouterr().err
    assert code == 2
    assert "guard" in err


def test_witness_no_csp(capsys):
    code = main(["witness", "no-csp", "--datum", DEP, "--level", "3", "--aux-level", "5"])
    out = capsys.readouterr().out
    assert code == 0
    assert "witness-element:" in out
    assert "verdict: Verified" in out


def test_witness_kind_needs_matching_datum(capsys):
    code = main(["witness", "no-csp", "--datum", GS, "--level", "3"])
    assert code == 3
    code = main(["witness", "exceptional", "--datum", S22, "--level", "2"])
    assert code == 3


def test_json_report(tmp_path, capsys):
    path = tmp_path / "report.json"
    code = main(
        [
            "check",
            "abelianization-index",
            "--datum",
            GS,
            "--level",
            "3",
            "--json-report",
            str(path),
        ]
    )
    capsys.readouterr()
    assert code == 0
    data = json.loads(path.read_text())
    assert data["command"] == "check"
    report = data["report"]
    assert report["check"] == "abelianization-index"
    assert report["verdict"] == "Verified"
    assert report["as_predicted"] is True
    assert report["certificates"]["measured-exponent"] == 2


def test_repeat_runs_identical(capsys):
    args = ["check", "fractality", "--datum", S22, "--level", "3"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    second = capsys.readouterr().out
    assert first == second


def test_cache_dir_does_not_change_output(tmp_path, capsys):
    args = ["quotient", "--datum", S22, "--level", "3"]
    main(args)
    plain = capsys.readouterr().out
    main(args + ["--cache-dir", str(tmp_path)])
    cached_cold = capsys.readouterr().out
    main(args + ["--cache-dir", str(tmp_path)])
    cached_warm = capsys.readouterr().out
    assert plain == cached_cold == cached_warm
    assert list(tmp_path.glob("chain-*.json"))
