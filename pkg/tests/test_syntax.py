import glob
import os

import pytest

from minivc.syntax import ast as A
from minivc.syntax import parse, parse_expr, pretty_print
from minivc.syntax.parser import parse_or_diagnostics

from conftest import CORPUS, corpus_text

CORPUS_FILES = sorted(glob.glob(os.path.join(CORPUS, "*.dfy")))


def test_final_factorial_shape():
    p = parse(corpus_text("factorial_final"))
    fn, m = p.decls
    assert isinstance(fn, A.Function) and isinstance(m, A.Method)
    assert len(m.requires) == 1 and len(m.ensures) == 1
    loops = [s for s in _walk(m.body) if isinstance(s, A.While)]
    assert len(loops) == 1 and len(loops[0].invariants) == 2


def test_empty_input():
    assert parse("").decls == []


def test_divby5_calc_shape():
    p = parse(corpus_text("compute5f_calc"))
    lemma = p.find("DivBy5_Lemma")
    calc = next(s for s in _walk(lemma.body) if isinstance(s, A.Calc))
    assert len(calc.lines) == 5
    assert calc.ops == ["=="] * 4
    nonempty = [i for i, h in enumerate(calc.hints) if h]
    assert nonempty == [1, 3]            # steps 2 and 4


def test_multi_assignment():
    p = parse("method m() { var i, t1, t2 := 0, 1, 1; i, t1, t2 := i+1, 8*t1, 3*t2; }")
    s = p.decls[0].body[1]
    assert isinstance(s, A.Assign) and len(s.lhs) == 3 and len(s.rhs) == 3


@pytest.mark.parametrize("src, text", [
    ("f == factorial(n)", "f == factorial(n)"),
    ("0", "0"),
    ("old(a[..])", "old(a[..])"),
    ("a[j-1] <= a[j+1]", "a[j - 1] <= a[j + 1]"),
    ("x ==> y ==> z", "x ==> y ==> z"),
    ("(x ==> y) ==> z", "(x ==> y) ==> z"),
    ("-(a - b) * c", "-(a - b) * c"),
])
def test_pretty_print_expr(src, text):
    assert pretty_print(parse_expr(src)) == text


def test_pretty_print_nodes():
    e = A.Binary("==", A.Var("f"), A.FnCall("factorial", [A.Var("n")]))
    assert pretty_print(e) == "f == factorial(n)"
    assert pretty_print(A.IntLit(0)) == "0"
    assert pretty_print(A.Old(A.Slice(A.Var("a"), None, None))) == "old(a[..])"


def test_spans_are_one_based():
    p = parse(corpus_text("factorial_broken_entry"))
    m = p.find("computeFactorial")
    w = next(s for s in m.body if isinstance(s, A.While))
    assert (w.span.line, w.span.col) == (13, 1)
    assert w.invariants[0].span.line == 14


def test_chained_assert_is_conjunction():
    e = parse_expr("a == b == c")
    assert e.op == "&&" and e.left.op == "==" and e.right.op == "=="


def test_syntax_error_reported_with_span():
    prog, diags = parse_or_diagnostics("method m() { x := ; }\nfunction g(): int { 1 }")
    assert diags and diags[0].kind == "syntax"
    assert (diags[0].span.line, diags[0].span.col) == (1, 19)
    assert prog.find("g") is not None          # parsing resumed after the error


def test_clauses_with_and_without_semicolons():
    a = parse("method m(n:int) requires n >= 0; requires n < 9 { }")
    b = parse("method m(n:int) requires n >= 0\n requires n < 9\n { }")
    assert a.decls[0].requires == b.decls[0].requires


def test_decreases_tuple():
    p = parse("method M(xs: int) decreases xs, 1 { }")
    assert len(p.decls[0].decreases) == 2


@pytest.mark.parametrize("path", CORPUS_FILES, ids=os.path.basename)
def test_round_trip(path):
    with open(path) as fh:
        first = parse(fh.read(), os.path.basename(path))
    assert not isinstance(first, list)
    printed = pretty_print(first)
    second = parse(printed, os.path.basename(path))
    assert not isinstance(second, list)
    assert second == first
    assert pretty_print(second) == printed


def _walk(stmts):
    for s in stmts or []:
        yield s
        for attr in ("then", "els", "body", "stmts"):
            sub = getattr(s, attr, None)
            if isinstance(sub, list):
                yield from _walk(sub)
