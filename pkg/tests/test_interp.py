import itertools
import math
import random

import pytest

from minivc import interp
from minivc.interp import Multiset, RuntimeFault

from conftest import load


def fault_kind(thunk):
    with pytest.raises(RuntimeFault) as info:
        thunk()
    return info.value.kind


def f_oracle(k):
    return (2 ** (3 * k) - 3 ** k) // 5


def test_factorial_examples():
    _, tp = load("factorial_final")
    assert interp.run_method(tp, "computeFactorial", [5]) == [120]
    assert interp.run_method(tp, "computeFactorial", [0]) == [1]


@pytest.mark.parametrize("name", ["factorial_final", "factorial_modular",
                                  "factorial_function_method"])
def test_factorial_oracle(name):
    _, tp = load(name)
    for n in range(11):
        assert interp.run_method(tp, "computeFactorial", [n]) == [math.factorial(n)]
        assert interp.call_function(tp, "factorial", [n]) == math.factorial(n)


def test_exp_and_f():
    _, tp = load("compute5f_spec")
    assert interp.call_function(tp, "exp", [3, 2]) == 9
    assert interp.call_function(tp, "f", [2]) == 11 == f_oracle(2)


@pytest.mark.parametrize("name", ["compute5f_calc", "compute5f_simplified"])
def test_compute5f_oracle(name):
    _, tp = load(name)
    for k in range(1, 9):
        assert interp.run_method(tp, "compute5f", [k]) == [5 * f_oracle(k)]


def test_multiset_order_insensitive():
    assert Multiset([2, 7]) == Multiset([7, 2])
    assert Multiset([2, 2]) != Multiset([2])


def test_eval_expr_multiset():
    p, tp = load("lemma E(a: seq<int>, b: seq<int>) ensures multiset(a) == multiset(b)\n")
    e = p.decls[0].ensures[0]
    assert interp.eval_expr(e, {"a": (2, 7), "b": (7, 2)}, tp) is True
    assert interp.eval_expr(e, {"a": (2, 7), "b": (7, 7)}, tp) is False


def test_bubblesort_worked_example():
    _, tp = load("bubblesort_final")
    cells = [7, 2, 6, 3, 4]
    interp.run_method(tp, "bubbleSort", [cells])
    assert cells == [2, 3, 4, 6, 7]


def _sorts(tp, cells):
    before = list(cells)
    interp.run_method(tp, "bubbleSort", [cells])
    return cells == sorted(before)


def test_bubblesort_exhaustive():
    _, tp = load("bubblesort_final")
    for n in range(0, 5):                    # the full sweep is in the acceptance suite
        for xs in itertools.product((-1, 0, 1, 2), repeat=n):
            assert _sorts(tp, list(xs)), xs


def test_bubblesort_random():
    _, tp = load("bubblesort_final")
    rng = random.Random(7)
    for _ in range(50):
        xs = [rng.randint(-50, 50) for _ in range(rng.randint(7, 10))]
        assert _sorts(tp, xs), xs


def test_precondition_fault():
    _, tp = load("factorial_final")
    assert fault_kind(lambda: interp.run_method(tp, "computeFactorial", [-1])) \
        == "precondition"
    assert fault_kind(lambda: interp.call_function(tp, "factorial", [-1])) \
        == "precondition"


def test_invariant_entry_fault():
    _, tp = load("factorial_broken_entry")
    assert fault_kind(lambda: interp.run_method(tp, "computeFactorial", [0])) \
        == "invariant"
    assert interp.run_method(tp, "computeFactorial", [4]) == [24]


def test_unchecked_run_skips_contracts():
    _, tp = load("factorial_broken_entry")
    assert interp.run_method(tp, "computeFactorial", [0], check_contracts=False) == [0]


@pytest.mark.parametrize("body, kind", [
    ("r := 1 / x;", "division"),
    ("var a := new int[2]; r := a[x + 2];", "bounds"),
    ("assert x > 0; r := x;", "assert"),
    ("r := -1;", "postcondition"),
    ("r := 0; while true { r := r + 1; }", "nontermination-budget"),
])
def test_faults(body, kind):
    text = "method m(x: int) returns (r: int) ensures r >= 0\n{ " + body + " }"
    p, tp = load(text)
    assert fault_kind(lambda: interp.run_method(tp, "m", [0], budget=10_000)) == kind


def test_euclidean_division():
    p, tp = load("method m(x: int, y: int) returns (q: int, r: int) "
                 "requires y != 0 { q := x / y; r := x % y; }")
    for x in range(-7, 8):
        for y in (-3, -2, 2, 3):
            q, r = interp.run_method(tp, "m", [x, y])
            assert 0 <= r < abs(y) and q * y + r == x


def test_ghost_code_erased():
    _, tp = load("create_array_ghost")
    assert interp.run_method(tp, "CreateArray", [3], check_contracts=False) is not None


def test_mutual_recursion_runs():
    p, tp = load("mutual_recursion_tuple")
    m = p.find("M")
    arg = _list_value(tp, [1, 2, 3])
    interp.run_method(tp, m, [arg])


def _list_value(tp, xs):
    dt = next(d for d in tp.program.decls if hasattr(d, "ctors"))
    nil, cons = dt.ctors
    if len(nil.fields) > len(cons.fields):
        nil, cons = cons, nil
    out = interp.DatatypeValue(nil.name)
    for x in reversed(xs):
        out = interp.DatatypeValue(cons.name, (x, out),
                                   tuple(f.name for f in cons.fields))
    return out
