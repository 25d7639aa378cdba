import pytest

from minivc import logic as L
from minivc import smt, vcgen

from conftest import load, needs_solver

EXP = ("function exp(x:int,e:int):int\n  requires e >= 0\n"
       "{ if e==0 then 1 else x * exp(x,e-1) }\n")


def _obs(name_or_text, decl=None, fuel=2):
    p, tp = load(name_or_text)
    th = vcgen.Theory(tp)
    decls = [p.find(decl)] if decl else p.decls
    return [ob for d in decls for ob in vcgen.vc_declaration(d, tp, fuel, th)]


def _post(obs):
    return [o for o in obs if o.kind == "postcondition"]


def test_symbol_quoting():
    assert smt.symbol("x") == "x"
    assert smt.symbol("i'@1") == "|i'@1|"


def test_lowering_deterministic():
    a = [smt.lower(o).text for o in _obs("bubblesort_final")]
    b = [smt.lower(o).text for o in _obs("bubblesort_final")]
    assert a == b


def test_lowering_declares_every_symbol():
    for o in _obs("compute5f_calc", "compute5f"):
        text = smt.lower(o).text
        assert "(check-sat)" in text
        for c in L.free_consts(o.formula()):
            if c.name == "$fuel":              # replaced by a concrete fuel term
                continue
            assert smt.symbol(c.name) in text


def test_fuel_term():
    assert str(smt.fuel_term(2)) == "(FS (FS FZ))"


@needs_solver
def test_exp_base_case():
    obs = _obs(EXP + "lemma B() ensures exp(2,0) == 1 { }", "B")
    assert smt.check(_post(obs)[0]).status == "proved"


@needs_solver
def test_exp_unfold_one_step():
    text = EXP + ("lemma S(x:int, e:int) requires e >= 0\n"
                  "  ensures x * exp(x,e) == exp(x,e+1) { }")
    assert smt.check(_post(_obs(text, "S"))[0]).status == "proved"


@needs_solver
def test_divby5_needs_the_lemma():
    post = _post(_obs("compute5f_no_lemmas", "compute5f"))
    assert smt.check(post[0]).status != "proved"


@needs_solver
def test_broken_entry_refuted_with_genuine_model():
    obs = [o for o in _obs("factorial_broken_entry") if o.kind == "invariant-entry"]
    v = smt.check(obs[0])
    assert v.status == "refuted"
    assert v.model["n"] == 0
    assert smt.confirm(obs[0], v.candidate) is True


@needs_solver
def test_tiny_timeout():
    post = _post(_obs("compute5f_no_lemmas", "compute5f"))[0]
    assert smt.check(post, timeout=0.001).status in ("timeout", "unknown")


def test_missing_solver():
    with pytest.raises(smt.SolverConfigError):
        smt.find_solver("/nonexistent/z3")


def test_trivial_goal_needs_no_solver():
    ob = vcgen.Obligation(L.TRUE, [], "assertion", None, "x")
    assert smt.check(ob, solver_path="/nonexistent/z3").proved


def test_parse_model():
    text = """sat
(
  (define-fun n () Int 0)
  (define-fun b () Bool false)
  (define-fun m () Int (- 3))
  (define-fun g ((x!0 Int)) Int (ite (= x!0 1) 7 2))
  (define-fun h () (Array Int Int) ((as const (Array Int Int)) 4))
)"""
    m = smt.parse_model(text)
    assert m.values["n"] == 0 and m.lookup("m") == -3
    assert m.lookup("b") is False
    assert m.apply("g", [1]) == 7 and m.apply("g", [5]) == 2
    assert m.lookup("h").get(99) == 4


def test_parse_model_absent():
    assert smt.parse_model("unsat") is None


def test_parse_sexprs_unbalanced():
    with pytest.raises(ValueError):
        smt.parse_sexprs("((a b)")


@needs_solver
@pytest.mark.parametrize("name", ["factorial_final", "expplus3_lemma",
                                  "compute5f_simplified"])
def test_fuel_monotone(name):
    proved = []
    for fuel in (1, 2, 3):
        obs = _obs(name, fuel=fuel)
        proved.append({i for i, o in enumerate(obs)
                       if smt.check(o, fuel=fuel).proved})
    assert proved[0] <= proved[1] <= proved[2]
