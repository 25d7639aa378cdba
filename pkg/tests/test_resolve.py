import pytest

from minivc.resolve import (check_frames, check_ghost, front_end,
                            resolve_and_typecheck, strongly_connected)
from minivc.syntax import parse

from conftest import corpus_text, load


def diags_of(text):
    program = parse(text, "t.dfy")
    if isinstance(program, list):       # syntax-level diagnostics
        return program
    tp, diags = front_end(program)
    return diags


def kinds(diags):
    return [(d.kind, d.span.line) for d in diags]


def test_figure1_signatures():
    _, tp = load("bubblesort_final")
    assert str(tp.var("sorted", "a").type) == "array<int>"
    assert str(tp.type_of(tp.decl("sorted").body)) == "bool"
    assert [str(tp.var("permutation", p).type) for p in ("a", "b")] == ["seq<int>"] * 2
    assert str(tp.type_of(tp.decl("permutation").body)) == "bool"


def test_type_mismatch():
    text = corpus_text("factorial_final") + "\nmethod bad() { var x := factorial(true); }"
    ds = resolve_and_typecheck(parse(text, "t.dfy"))
    assert isinstance(ds, list) and ds[0].kind == "type-mismatch"


@pytest.mark.parametrize("text, kind", [
    ("method m() { x := 1; }", "unresolved"),
    ("function f(x:int): int { x }\nmethod m() { var y := f(1, 2); }", "arity-mismatch"),
    ("function f(x:int): int { x }\nfunction f(x:int): int { x }", "duplicate"),
    ("function f(x:int): int { old(x) }", "old-context"),
    ("method m() returns (r: int) { }", "definite-assignment"),
])
def test_front_end_errors(text, kind):
    assert kind in [d.kind for d in diags_of(text)]


def test_mutual_recursion_cycle():
    _, tp = load("mutual_recursion_tuple")
    assert tp.scc_of("M") == {"M", "M1", "M2"}
    assert tp.is_recursive("M1")


def test_tarjan():
    g = {"a": {"b"}, "b": {"a", "c"}, "c": set(), "d": {"d"}}
    comps = sorted(sorted(c) for c in strongly_connected(g))
    assert comps == [["a", "b"], ["c"], ["d"]]


def test_ghost_counter_accepted():
    _, tp = load("create_array_ghost")
    assert check_ghost(tp) == []


def test_ghost_guard_rejected():
    ds = diags_of(corpus_text("create_array_ghost_guard"))
    assert kinds(ds) == [("ghost-flow", 7)]
    assert ds[0].message == "ghost value flows into compiled context"


def test_lemma_calls_are_ghost():
    _, tp = load("compute5f_calc")
    assert check_ghost(tp) == []


@pytest.mark.parametrize("body", [
    "x := g;",                      # assignment
    "if g > 0 { x := 1; }",         # branch condition
    "a[g] := 1;",                   # array index
    "x := h(g);",                   # call argument
])
def test_ghost_flow_sites(body):
    text = ("method h(y: int) returns (z: int) { z := y; }\n"
            "method m(a: array<int>) requires a != null && a.Length > 5 modifies a\n"
            "{ ghost var g := 1; var x := 0; " + body + " }")
    assert "ghost-flow" in [d.kind for d in diags_of(text)]


def test_ghost_allowed_in_specs():
    text = ("method m(n: int) { ghost var g := n; var i := 0;\n"
            "while i < n invariant g == n { i := i + 1; } assert g == n; }")
    assert diags_of(text) == []


def test_frames_ok_on_figure1():
    _, tp = load("bubblesort_final")
    assert check_frames(tp) == []


def test_missing_reads():
    text = corpus_text("bubblesort_final").replace(
        "predicate sorted (a:array<int>)\n  requires a != null\n  reads a\n",
        "predicate sorted (a:array<int>)\n  requires a != null\n")
    assert text != corpus_text("bubblesort_final")
    assert "insufficient-reads" in [d.kind for d in diags_of(text)]


def test_missing_reads_at_element_access():
    text = "predicate p(a: array<int>) requires a != null && a.Length > 0 { a[0] == 1 }"
    ds = diags_of(text)
    assert [d.kind for d in ds] == ["insufficient-reads"]
    assert ds[0].span.col == text.index("a[0]") + 1


def test_reads_transitive():
    text = ("function f(a: array<int>): int requires a != null && a.Length > 0 reads a { a[0] }\n"
            "function g(a: array<int>): int requires a != null && a.Length > 0 { f(a) }")
    ds = diags_of(text)
    assert kinds(ds) == [("insufficient-reads", 2)]


def test_length_needs_no_reads():
    assert diags_of("function n(a: array<int>): int requires a != null { a.Length }") == []


def test_modifies_violation_direct_and_transitive():
    text = ("method s(a: array<int>) requires a != null && a.Length > 0 modifies a { a[0] := 1; }\n"
            "method t(a: array<int>) requires a != null && a.Length > 0 { a[0] := 2; }\n"
            "method u(a: array<int>) requires a != null && a.Length > 0 { s(a); }")
    assert kinds(diags_of(text)) == [("modifies-violation", 2), ("modifies-violation", 3)]


def test_fresh_arrays_need_no_modifies():
    text = "method m() { var a := new int[3]; a[0] := 1; }"
    assert diags_of(text) == []


def test_lemma_with_modifies_rejected():
    text = "lemma L(a: array<int>) requires a != null modifies a { }"
    assert "modifies-violation" in [d.kind for d in diags_of(text)]


def test_calc_relation_mix_rejected():
    text = ("lemma L(x: int) { calc { x; < x + 1; > x; } }")
    ds = diags_of(text)
    assert [d.kind for d in ds] == ["calc-step"]


def test_corpus_final_programs_clean():
    for name in ("factorial_final", "factorial_modular", "compute5f_calc",
                 "compute5f_simplified", "expplus3_lemma", "bubblesort_final",
                 "create_array_ghost", "mutual_recursion_tuple"):
        tp, diags = front_end(parse(corpus_text(name), name))
        assert tp is not None and diags == [], name


def test_checks_order_independent():
    text = corpus_text("bubblesort_final")
    p1 = parse(text, "a")
    p2 = parse(text, "a")
    p2.decls.reverse()
    d1 = front_end(p1)[1]
    d2 = front_end(p2)[1]
    assert kinds(d1) == kinds(d2)
