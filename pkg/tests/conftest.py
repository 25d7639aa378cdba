import os

import pytest

from minivc import driver
from minivc.resolve import front_end
from minivc.syntax.parser import parse

CORPUS = driver.corpus_dir()


def corpus_path(name):
    if not name.endswith(".dfy"):
        name += ".dfy"
    return os.path.join(CORPUS, name)


def corpus_text(name):
    with open(corpus_path(name), encoding="utf-8") as fh:
        return fh.read()


def load(name_or_text, file=None):
    """Parse and type-check a corpus file (by name) or literal program text."""
    if "\n" in name_or_text or "{" in name_or_text:
        text, file = name_or_text, file or "<test>"
    else:
        text, file = corpus_text(name_or_text), name_or_text + ".dfy"
    program = parse(text, file)
    assert not isinstance(program, list), program
    tp, diags = front_end(program)
    assert tp is not None, diags
    return program, tp


def have_solver():
    try:
        driver.smt.find_solver()
        return True
    except driver.smt.SolverConfigError:
        return False


needs_solver = pytest.mark.skipif(not have_solver(), reason="no SMT solver on PATH")


@pytest.fixture
def corpus():
    return load


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
