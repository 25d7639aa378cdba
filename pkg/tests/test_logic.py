import random

import pytest

from minivc import logic as L
from minivc.logic import INT, BOOL, Const, IntVal, euclid_div, euclid_mod

x, y = Const("x", INT), Const("y", INT)
p, q = Const("p", BOOL), Const("q", BOOL)


@pytest.mark.parametrize("a, b", [(7, 5), (-7, 5), (7, -5), (-7, -5), (0, 3), (10, 5)])
def test_euclidean_remainder_non_negative(a, b):
    d, m = euclid_div(a, b), euclid_mod(a, b)
    assert a == b * d + m and 0 <= m < abs(b)


def test_euclid_random():
    rng = random.Random(3)
    for _ in range(2000):
        a, b = rng.randint(-50, 50), rng.choice([i for i in range(-9, 10) if i])
        m = euclid_mod(a, b)
        assert 0 <= m < abs(b) and (a - m) % b == 0


def test_constant_folding():
    assert L.mk("+", (IntVal(2), IntVal(3))) == IntVal(5)
    assert L.mk("*", (IntVal(8), L.mk("*", (IntVal(1), x)))) == L.mk("*", (IntVal(8), x))
    assert L.mk("mod", (IntVal(-7), IntVal(5))) == IntVal(3)
    assert L.mk("<", (IntVal(1), IntVal(2))) == L.TRUE
    assert L.mk("<=", (x, x)) == L.TRUE


def test_boolean_simplification():
    assert L.And(p, L.TRUE) == p
    assert L.And(p, L.FALSE) == L.FALSE
    assert L.Or(p, L.TRUE) == L.TRUE
    assert L.Implies(L.TRUE, q) == q
    assert L.Implies(p, L.TRUE) == L.TRUE
    assert L.Not(L.Not(p)) == p
    assert L.And(L.And(p, q), p).args == (p, q)
    assert L.Ite(L.TRUE, x, y) == x


def test_select_over_store():
    arr = Const("h", L.array_sort(INT, INT))
    st = L.mk("store", (arr, IntVal(1), IntVal(9)))
    assert L.mk("select", (st, IntVal(1))) == IntVal(9)
    assert L.mk("select", (st, IntVal(2))) == L.mk("select", (arr, IntVal(2)))


def test_substitute_folds_and_respects_binders():
    t = L.mk("+", (x, IntVal(1)))
    assert L.substitute(t, {x: IntVal(4)}) == IntVal(5)
    qt = L.quant("forall", [x], L.mk("<=", (x, y)))
    assert L.substitute(qt, {x: IntVal(0)}) == qt
    assert L.free_consts(L.substitute(qt, {y: IntVal(3)})) == set()


def test_quant_drops_unused_vars():
    assert L.quant("forall", [x], L.mk("<", (y, IntVal(3)))) == L.mk("<", (y, IntVal(3)))


def test_terms_hash_consistently():
    a = L.mk("+", (x, y))
    b = L.mk("+", (Const("x", INT), Const("y", INT)))
    assert a == b and hash(a) == hash(b)
