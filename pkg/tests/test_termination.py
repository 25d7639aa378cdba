import random

import pytest

from minivc import logic as L
from minivc import termination as T
from minivc.resolve import INT
from minivc.syntax import ast as A

from conftest import load


def site(tp, decl, nth=0):
    d = tp.decl(decl)
    if nth is None:
        return d
    return list(T.loop_sites(d.body))[nth]


def normalized(text):
    return text.replace(" ", "")


@pytest.mark.parametrize("name, decl, nth, expected", [
    ("factorial_final", "factorial", None, "n"),
    ("factorial_final", "computeFactorial", 0, "n-1-i"),
    ("compute5f_calc", "compute5f", 0, "k-i"),
    ("bubblesort_final", "bubbleSort", 0, "a.Length-i"),
    ("bubblesort_final", "bubbleStep", 0, "j-0"),
])
def test_guesses_match_reported(name, decl, nth, expected):
    _, tp = load(name)
    m = T.guess_metric(site(tp, decl, nth), tp)
    assert m.origin == "guessed"
    assert normalized(m.text()) == expected


@pytest.mark.parametrize("guard, expected", [
    ("i < n", "n - i"), ("i <= n", "n - i"), ("n > i", "n - i"),
    ("n >= i", "n - i"), ("i != n", "n - i"), ("i < n && b", "n - i"),
])
def test_guard_rules(guard, expected):
    from minivc.syntax import parse_expr
    w = A.While(parse_expr(guard), [], None, [])
    assert T.guess_metric(w).text() == expected


def test_no_rule_no_guess():
    from minivc.syntax import parse_expr
    assert T.guess_metric(A.While(parse_expr("b"), [], None, [])) is None


def test_user_decreases_overrides():
    _, tp = load("create_array_ghost")
    w = site(tp, "CreateArray")
    m = T.metric_of(w, tp)
    assert m.origin == "user-written" and normalized(m.text()) == "n-c"


def test_recursive_method_guess_is_param_tuple():
    _, tp = load("mutual_recursion_no_tuple")
    assert T.guess_metric(tp.decl("M1"), tp).text() == "xs"


def test_report_metrics_lists_sites():
    _, tp = load("factorial_final")
    rows = T.report_metrics(tp)
    assert [(d, normalized(t), o) for d, _, t, o in rows] == [
        ("factorial", "n", "guessed"), ("computeFactorial", "n-1-i", "guessed")]


def _eval(t, env):
    if isinstance(t, L.IntVal) or isinstance(t, L.BoolVal):
        return t.value
    if isinstance(t, L.Const):
        return env[t.name]
    args = [_eval(a, env) for a in t.args]
    ops = {"<": lambda a, b: a < b, ">=": lambda a, b: a >= b,
           "=": lambda a, b: a == b, "not": lambda a: not a,
           "and": lambda *a: all(a), "or": lambda *a: any(a)}
    return ops[t.op](*args)


def test_lexicographic_order_matches_brute_force():
    rng = random.Random(7)
    for _ in range(1000):
        n = rng.randint(1, 3)
        old = [rng.randint(-2, 3) for _ in range(n)]
        new = [rng.randint(-2, 3) for _ in range(n)]
        ov = [L.Const(f"o{i}", L.INT) for i in range(n)]
        nv = [L.Const(f"n{i}", L.INT) for i in range(n)]
        f = T.lex_decrease(nv, ov, [INT] * n)
        env = {f"o{i}": old[i] for i in range(n)}
        env.update({f"n{i}": new[i] for i in range(n)})
        assert _eval(f, env) == T.brute_force_lex_less(new, old), (new, old)


def test_single_int_component_split():
    a, b = L.Const("a", L.INT), L.Const("b", L.INT)
    goals = T.decrease_goals([a], [b], [INT])
    assert [k for k, _ in goals] == ["decreases-decrease", "decreases-bounded"]


def test_common_prefix_for_unequal_lengths():
    a, b, c = (L.Const(n, L.INT) for n in "abc")
    f = T.lex_decrease([a], [b, c], [INT, INT])
    assert f == L.And(L.mk("<", (a, b)), L.mk(">=", (b, L.IntVal(0))))
