import pytest

from minivc import logic as L
from minivc import smt, vcgen
from minivc.diagnostics import DiagnosticError
from minivc.syntax import ast as A

from conftest import load, needs_solver


def _loop(m):
    return next(s for s in vcgen._walk_stmts(m.body) if isinstance(s, A.While))


def _obs(name_or_text, decl=None):
    p, tp = load(name_or_text)
    th = vcgen.Theory(tp)
    decls = [p.find(decl)] if decl else p.decls
    return [ob for d in decls for ob in vcgen.vc_declaration(d, tp, theory=th)]


def test_wp_of_factorial_step():
    p, tp = load("factorial_final")
    m = p.find("computeFactorial")
    th = vcgen.Theory(tp)
    w = _loop(m)
    inv = vcgen.encode_expr(w.invariants[1], tp, m, theory=th)
    f, obs = vcgen.wp_stmt(w.body[1], inv, tp, m, theory=th)
    assert obs == []
    assert str(f) == ("(= (* (* f (- n i)) (factorial $fuel (- (- n i) 1))) "
                      "(factorial $fuel n))")


def test_wp_of_assume_is_implication():
    p, tp = load("factorial_final")
    m = p.find("computeFactorial")
    th = vcgen.Theory(tp)
    phi = m.requires[0]
    post = vcgen.encode_expr(m.ensures[0], tp, m, theory=th)
    f, _ = vcgen.wp_stmt(A.Assume(phi, span=phi.span), post, tp, m, theory=th)
    assert f == L.Implies(vcgen.encode_expr(phi, tp, m, theory=th), post)


@needs_solver
def test_swap_preserves_multiset():
    p, tp = load("bubblesort_final")
    m = p.find("bubbleStep")
    th = vcgen.Theory(tp)
    w = _loop(m)
    swap = w.body[0]
    post = vcgen.encode_expr(w.invariants[2], tp, m, theory=th)
    f, _ = vcgen.wp_stmt(swap, post, tp, m, theory=th)
    hyps = [vcgen.encode_expr(r, tp, m, theory=th) for r in m.requires]
    hyps += [post, vcgen.encode_expr(w.guard, tp, m, theory=th)]
    hyps += [vcgen.encode_expr(i, tp, m, theory=th) for i in w.invariants[:2]]
    ob = vcgen.Obligation(f, hyps, "assertion", swap.span, "swap", "bubbleStep",
                          theory=th)
    assert smt.check(ob).status == "proved"


def test_old_of_literal():
    p, tp = load("bubblesort_final")
    m = p.find("bubbleSort")
    assert vcgen.encode_old(A.IntLit(5), tp, m) == L.IntVal(5)


def test_old_reads_entry_heap():
    p, tp = load("bubblesort_final")
    m = p.find("bubbleStep")
    perm = _loop(m).invariants[2]              # permutation(a[..], old(a[..]))
    now, then = (vcgen.encode_expr(x, tp, m) for x in perm.args)
    assert now != then
    assert "$Old_" in str(then) and "$Old_" not in str(now)


def test_calc_steps_one_per_operator():
    obs = _obs("compute5f_calc", "DivBy5_Lemma")
    assert [o.kind for o in obs].count("calc-step") == 4


def test_single_line_calc_is_trivial():
    p, tp = load("lemma L(x: int) { calc { x + 1; } }")
    calc = p.decls[0].body[0]
    out = vcgen.desugar_calc(calc, tp)
    assert len(out) == 1 and isinstance(out[0], A.Assume)
    assert out[0].expr == A.BoolLit(True)
    assert all(o.kind != "calc-step" for o in vcgen.vc_declaration(p.decls[0], tp))


@pytest.mark.parametrize("ops, rel", [
    (["=="], "=="),
    (["==", "<="], "<="),
    (["<=", "<", "=="], "<"),
    (["==>", "=="], "==>"),
    (["==", "!="], "!="),
])
def test_calc_relation(ops, rel):
    assert vcgen.calc_relation(ops) == rel


@pytest.mark.parametrize("ops", [["<", ">"], ["!=", "!="], ["==>", "<=="]])
def test_calc_relation_rejects(ops):
    with pytest.raises(DiagnosticError):
        vcgen.calc_relation(ops)


@needs_solver
def test_calc_hint_is_scoped():
    text = ("lemma Five(x: int) ensures x == 5\n"
            "lemma T(x: int) { calc { x; == { Five(x); } 5; } assert x == 7; }")
    obs = _obs(text, "T")
    status = {o.kind: smt.check(o).status for o in obs}
    assert status["calc-step"] == "proved"
    assert status["assertion"] != "proved"


def test_function_without_requires_gets_termination_obligations():
    obs = _obs("factorial_no_requires", "factorial")
    assert sorted(o.kind for o in obs) == ["decreases-bounded", "decreases-decrease"]


@needs_solver
def test_function_without_requires_fails():
    obs = _obs("factorial_no_requires", "factorial")
    assert any(smt.check(o).status != "proved" for o in obs)


@needs_solver
def test_exp_precondition_valid():
    obs = _obs("compute5f_spec", "exp")
    pre = [o for o in obs if o.kind == "function-precondition"]
    assert str(pre[0].goal) == "(>= (- e 1) 0)"
    assert all(smt.check(o).proved for o in obs)


def test_division_by_literal_trivial():
    obs = _obs("compute5f_spec", "f")
    div = [o for o in obs if o.kind == "division"]
    assert len(div) == 1 and div[0].goal == L.TRUE


def test_encode_call_with_ensures():
    p, tp = load("factorial_modular")
    m = p.find("computeFactorial")
    call = next(s for s in vcgen._walk_stmts(m.body) if isinstance(s, A.Call))
    obs, post = vcgen.encode_call(call, p.find("oneStep"), tp, m)
    assert [o.kind for o in obs] == ["precondition-at-call"]
    assert post.env["n"] == L.Const("n", L.INT)
    assert post.env["i"] != L.Const("i", L.INT)          # outputs are fresh
    assert f"(> {post.env['i']} i)" in [str(h) for h in post.hyps]


def test_encode_call_without_ensures_loses_progress():
    p, tp = load("onestep_no_ensures")
    m = p.find("computeFactorial")
    call = next(s for s in vcgen._walk_stmts(m.body) if isinstance(s, A.Call))
    _, post = vcgen.encode_call(call, p.find("oneStep"), tp, m)
    assert not any(f"(> {post.env['i']} i)" == str(h) for h in post.hyps)


def test_lemma_call_keeps_heaps():
    p, tp = load("compute5f_calc")
    m = p.find("compute5f")
    call = next(s for s in vcgen._walk_stmts(m.body) if isinstance(s, A.Call))
    obs, post = vcgen.encode_call(call, p.find("expPlus3_Lemma"), tp, m)
    assert [o.kind for o in obs] == ["precondition-at-call"]
    assert len(post.hyps) == 1 and "exp" in str(post.hyps[0])
    assert set(post.env.values()) >= {L.Const("i", L.INT), L.Const("t1", L.INT)}


GOLDEN_COUNTS = {
    "bubblesort_final": 63, "compute5f_calc": 63, "compute5f_simplified": 33,
    "expplus3_lemma": 8, "factorial_final": 13, "factorial_modular": 20,
    "mutual_recursion_tuple": 6, "create_array_ghost": 9,
}


@pytest.mark.parametrize("name", sorted(GOLDEN_COUNTS))
def test_obligations_deterministic(name):
    a = _obs(name)
    b = _obs(name)
    assert len(a) == GOLDEN_COUNTS[name]
    assert [(o.kind, o.span.line, o.span.col, str(o.formula())) for o in a] == \
           [(o.kind, o.span.line, o.span.col, str(o.formula())) for o in b]


def test_requires_clauses_equal_conjunction():
    body = " { var f := 1; while f < n invariant f <= n { f := f + 1; } }"
    split = _obs("method m(n: int) requires n >= 0 requires n < 100" + body)
    joined = _obs("method m(n: int) requires n >= 0 && n < 100" + body)
    assert [str(o.formula()) for o in split] == [str(o.formula()) for o in joined]
