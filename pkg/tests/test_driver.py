import json
import os

import pytest

from minivc import cli, driver

from conftest import corpus_path, corpus_text, needs_solver

FAST = driver.Options(timeout=10.0)


@needs_solver
def test_verified_exit_zero():
    r = driver.verify_file(corpus_path("factorial_final"), FAST)
    assert (r.verdict, r.exit_code) == ("verified", 0)
    c = r.counts()
    assert c["total"] == c["proved"] > 0


@needs_solver
def test_failure_exit_one_with_counterexample():
    r = driver.verify_file(corpus_path("factorial_broken_entry"), FAST)
    assert (r.verdict, r.exit_code) == ("failed", 1)
    [d] = r.errors
    assert (d.kind, d.span.line) == ("invariant-entry", 14)
    assert d.model == {"n": 0}


def test_front_end_exit_two():
    r = driver.verify_text("method m() { x := ; }", "t.dfy")
    assert (r.verdict, r.exit_code) == ("front-end", 2)
    assert r.errors[0].kind == "syntax"


def test_missing_file_exit_three():
    r = driver.verify_file("/nonexistent/x.dfy")
    assert r.exit_code == 3


def test_missing_solver_exit_three():
    opts = driver.Options(solver_path="/nonexistent/z3")
    r = driver.verify_text(corpus_text("factorial_final"), "f.dfy", opts)
    assert (r.verdict, r.exit_code) == ("environment", 3)


@needs_solver
def test_assumed_lemma_is_incomplete():
    r = driver.verify_file(corpus_path("compute5f_lemmas_unproved"), FAST)
    assert (r.verdict, r.exit_code) == ("incomplete", 1)
    assert r.errors == []
    assert [w.message for w in r.warnings] == [driver.ASSUMED_LEMMA] * 2


@needs_solver
def test_json_report_schema():
    r = driver.verify_file(corpus_path("factorial_broken_entry"), FAST)
    obj = json.loads(json.dumps(r.to_json()))
    assert obj["schema"] == 1
    assert set(obj) >= {"file", "verdict", "exit_code", "summary", "declarations",
                        "obligations", "diagnostics"}
    assert obj["summary"]["failed"] == 1
    assert {"name", "obligations", "proved", "metrics"} <= set(obj["declarations"][0])


@needs_solver
def test_report_order_deterministic():
    opts = driver.Options(workers=4)
    a = driver.verify_file(corpus_path("compute5f_no_lemmas"), opts)
    b = driver.verify_file(corpus_path("compute5f_no_lemmas"), driver.Options(workers=1))
    assert [d.format() for d in a.diagnostics] == [d.format() for d in b.diagnostics]
    assert [(o.kind, o.line, o.col) for o in a.obligations] == \
           [(o.kind, o.line, o.col) for o in b.obligations]


def test_manifest_formats(tmp_path):
    m = tmp_path / "manifest.jsonl"
    m.write_text('{"file": "a.dfy", "expect": "error", "kind": "assertion", "line": 3}\n'
                 '// comment\n'
                 '{"file": "b.dfy", "expect": "verified"}\n')
    a, b = driver.load_manifest(m)
    assert a.diagnostics == [{"kind": "assertion", "line": 3}]
    assert b.diagnostics == []


def test_packaged_manifest_covers_corpus():
    entries = driver.load_manifest(driver.corpus_manifest())
    files = {f for f in os.listdir(driver.corpus_dir()) if f.endswith(".dfy")}
    assert {e.file for e in entries} == files


# ---------------------------------------------------------------- CLI

@needs_solver
def test_cli_verify(capsys):
    assert cli.main(["verify", corpus_path("factorial_final")]) == 0
    assert "verified" in capsys.readouterr().out


@needs_solver
def test_cli_verify_counterexample(capsys):
    assert cli.main(["verify", corpus_path("factorial_broken_entry")]) == 1
    err = capsys.readouterr().err
    assert ":14:" in err and "invariant-entry" in err
    assert "counterexample: n = 0" in err


@needs_solver
def test_cli_show_decreases(capsys):
    cli.main(["verify", corpus_path("bubblesort_final"), "--show-decreases"])
    out = capsys.readouterr().out
    assert "decreases a.Length - i (guessed)" in out
    assert "decreases j - 0 (guessed)" in out


@needs_solver
def test_cli_json(capsys):
    cli.main(["verify", corpus_path("factorial_final"), "--json"])
    assert json.loads(capsys.readouterr().out)["verdict"] == "verified"


@needs_solver
def test_cli_dump_smt(tmp_path):
    cli.main(["verify", corpus_path("factorial_final"), "--dump-smt", str(tmp_path)])
    names = os.listdir(tmp_path)
    assert names and all(n.endswith(".smt2") for n in names)
    assert any(n.startswith("computeFactorial.invariant-entry.") for n in names)


def test_cli_run(capsys):
    assert cli.main(["run", corpus_path("factorial_final"), "computeFactorial", "5"]) == 0
    assert capsys.readouterr().out.split() == ["120"]


def test_cli_run_array(capsys):
    assert cli.main(["run", corpus_path("bubblesort_final"), "bubbleSort",
                     "[7,2,6,3,4]"]) == 0
    assert capsys.readouterr().out.strip() == "[2, 3, 4, 6, 7]"


def test_cli_run_fault(capsys):
    code = cli.main(["run", corpus_path("factorial_final"), "computeFactorial", "-1"])
    assert code == 1
    assert "precondition" in capsys.readouterr().err


def test_cli_run_unknown_method():
    assert cli.main(["run", corpus_path("factorial_final"), "nope"]) == 2


@needs_solver
def test_cli_corpus_subset(tmp_path, capsys):
    for name in ("factorial_final.dfy", "factorial_broken_entry.dfy"):
        (tmp_path / name).write_text(corpus_text(name))
    (tmp_path / "manifest.jsonl").write_text(
        '{"file": "factorial_final.dfy", "expect": "verified"}\n'
        '{"file": "factorial_broken_entry.dfy", "expect": "error", '
        '"kind": "invariant-entry", "line": 14}\n')
    assert cli.main(["corpus", str(tmp_path)]) == 0
    assert "2/2 corpus entries as expected" in capsys.readouterr().out


def test_cli_requires_subcommand():
    with pytest.raises(SystemExit):
        cli.main([])
