"""Solver-independent first-order formula IR.

Terms are immutable and hash-consed by structure.  Smart constructors
(``mk``) perform local simplification so that substitution followed by
rebuilding also folds constants.
"""

from __future__ import annotations

from typing import Dict, Iterable, Tuple


def euclid_div(a: int, b: int) -> int:
    """Euclidean division (remainder is never negative), as in SMT-LIB."""
    q = a // b
    if a - q * b < 0:
        q += 1
    return q


def euclid_mod(a: int, b: int) -> int:
    return a - b * euclid_div(a, b)


class Sort:
    __slots__ = ("name", "args", "_h")

    def __init__(self, name, args=()):
        self.name = name
        self.args = tuple(args)
        self._h = hash((name, self.args))

    def __eq__(self, other):
        return (isinstance(other, Sort) and self.name == other.name
                and self.args == other.args)

    def __hash__(self):
        return self._h

    def __repr__(self):
        return self.smt()

    def smt(self):
        if not self.args:
            return self.name
        return f"({self.name} {' '.join(a.smt() for a in self.args)})"


INT = Sort("Int")
BOOL = Sort("Bool")
REF = Sort("Ref")
FUEL = Sort("Fuel")


def array_sort(idx, elem):
    return Sort("Array", (idx, elem))


class Term:
    __slots__ = ("sort", "_h")

    def __eq__(self, other):
        return self is other or (type(self) is type(other)
                                 and self._h == other._h and self._key() == other._key())

    def __hash__(self):
        return self._h

    def __repr__(self):
        from minivc.smt import term_to_smt
        return term_to_smt(self)


class Const(Term):
    __slots__ = ("name",)

    def __init__(self, name, sort):
        self.name = name
        self.sort = sort
        self._h = hash(("c", name, sort))

    def _key(self):
        return (self.name, self.sort)


class IntVal(Term):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = int(value)
        self.sort = INT
        self._h = hash(("i", self.value))

    def _key(self):
        return self.value


class BoolVal(Term):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = bool(value)
        self.sort = BOOL
        self._h = hash(("b", self.value))

    def _key(self):
        return self.value


class App(Term):
    __slots__ = ("op", "args")

    def __init__(self, op, args, sort):
        self.op = op
        self.args = tuple(args)
        self.sort = sort
        self._h = hash(("a", op, self.args, sort))

    def _key(self):
        return (self.op, self.args, self.sort)


class Quant(Term):
    __slots__ = ("kind", "vars", "body", "patterns")

    def __init__(self, kind, vars, body, patterns=()):
        self.kind = kind
        self.vars = tuple(vars)
        self.body = body
        self.patterns = tuple(tuple(p) for p in patterns)
        self.sort = BOOL
        self._h = hash(("q", kind, self.vars, body, self.patterns))

    def _key(self):
        return (self.kind, self.vars, self.body, self.patterns)


TRUE = BoolVal(True)
FALSE = BoolVal(False)

ARITH = {"+", "-", "*", "div", "mod", "neg"}
COMPARE = {"<", "<=", ">", ">="}
BUILTIN = ARITH | COMPARE | {"=", "and", "or", "not", "=>", "ite", "select",
                             "store", "distinct"}


def is_builtin(op: str) -> bool:
    return op in BUILTIN or op.startswith("is:")


# ---------------------------------------------------------------- constructors

def mk(op, args, sort=None) -> Term:
    """Build an application, simplifying locally."""
    args = tuple(args)
    if sort is None:
        sort = _result_sort(op, args)
    simp = _simplify(op, args, sort)
    return simp if simp is not None else App(op, args, sort)


def _result_sort(op, args):
    if op in ARITH:
        return INT
    if op in COMPARE or op in ("=", "and", "or", "not", "=>", "distinct") \
            or op.startswith("is:"):
        return BOOL
    if op == "ite":
        return args[1].sort
    if op == "select":
        return args[0].sort.args[1]
    if op == "store":
        return args[0].sort
    raise ValueError(f"sort of '{op}' must be given")


def _lit(t):
    return isinstance(t, (IntVal, BoolVal))


def _simplify(op, args, sort):
    if op in ("+", "*") and len(args) == 2:
        a, b = args
        unit, zero = (0, None) if op == "+" else (1, 0)
        if isinstance(a, IntVal) and isinstance(b, IntVal):
            return IntVal(a.value + b.value if op == "+" else a.value * b.value)
        if isinstance(a, IntVal) and a.value == unit:
            return b
        if isinstance(b, IntVal) and b.value == unit:
            return a
        if zero is not None and ((isinstance(a, IntVal) and a.value == 0)
                                 or (isinstance(b, IntVal) and b.value == 0)):
            return IntVal(0)
        # fold constant factors of a left-nested product: (c1 * x) * c2
        if op == "*" and isinstance(b, IntVal) and isinstance(a, App) \
                and a.op == "*" and isinstance(a.args[0], IntVal):
            return mk("*", (IntVal(a.args[0].value * b.value), a.args[1]))
        if op == "*" and isinstance(a, App) and a.op == "*" \
                and isinstance(a.args[0], IntVal) and isinstance(a.args[1], IntVal):
            return mk("*", (IntVal(a.args[0].value * a.args[1].value), b))
        return None
    if op == "-" and len(args) == 2:
        a, b = args
        if isinstance(a, IntVal) and isinstance(b, IntVal):
            return IntVal(a.value - b.value)
        if isinstance(b, IntVal) and b.value == 0:
            return a
        return None
    if op == "neg":
        if isinstance(args[0], IntVal):
            return IntVal(-args[0].value)
        return None
    if op in ("div", "mod"):
        a, b = args
        if isinstance(a, IntVal) and isinstance(b, IntVal) and b.value != 0:
            f = euclid_div if op == "div" else euclid_mod
            return IntVal(f(a.value, b.value))
        return None
    if op in COMPARE:
        a, b = args
        if isinstance(a, IntVal) and isinstance(b, IntVal):
            x, y = a.value, b.value
            return BoolVal({"<": x < y, "<=": x <= y, ">": x > y,
                            ">=": x >= y}[op])
        if a == b:
            return BoolVal(op in ("<=", ">="))
        return None
    if op == "=":
        a, b = args
        if a == b:
            return TRUE
        if _lit(a) and _lit(b):
            return BoolVal(a.value == b.value)
        if a.sort == BOOL:
            if b == TRUE:
                return a
            if a == TRUE:
                return b
        return None
    if op == "not":
        a = args[0]
        if isinstance(a, BoolVal):
            return BoolVal(not a.value)
        if isinstance(a, App) and a.op == "not":
            return a.args[0]
        return None
    if op in ("and", "or"):
        unit, absorb = (TRUE, FALSE) if op == "and" else (FALSE, TRUE)
        flat = []
        for a in args:
            if a == absorb:
                return absorb
            if a == unit:
                continue
            if isinstance(a, App) and a.op == op:
                flat.extend(a.args)
            elif a not in flat:
                flat.append(a)
        if not flat:
            return unit
        if len(flat) == 1:
            return flat[0]
        if len(flat) != len(args) or any(x is not y for x, y in zip(flat, args)):
            return App(op, flat, BOOL)
        return None
    if op == "=>":
        a, b = args
        if a == TRUE:
            return b
        if a == FALSE or b == TRUE:
            return TRUE
        if b == FALSE:
            return mk("not", (a,))
        if a == b:
            return TRUE
        return None
    if op == "ite":
        c, t, e = args
        if c == TRUE:
            return t
        if c == FALSE:
            return e
        if t == e:
            return t
        if t.sort == BOOL and t == TRUE and e == FALSE:
            return c
        return None
    if op == "select":
        arr, idx = args
        while isinstance(arr, App) and arr.op == "store":
            if arr.args[1] == idx:
                return arr.args[2]
            if _lit(arr.args[1]) and _lit(idx):
                arr = arr.args[0]
                continue
            break
        if arr is not args[0]:
            return App("select", (arr, idx), sort)
        return None
    return None


# convenience wrappers

def And(*xs):
    return mk("and", xs)


def Or(*xs):
    return mk("or", xs)


def Not(x):
    return mk("not", (x,))


def Implies(a, b):
    return mk("=>", (a, b))


def Eq(a, b):
    return mk("=", (a, b))


def Ite(c, a, b):
    return mk("ite", (c, a, b))


def conj(xs: Iterable[Term]) -> Term:
    return mk("and", tuple(xs))


# ---------------------------------------------------------------- traversal

def substitute(t: Term, mapping: Dict[Term, Term]) -> Term:
    """Replace free occurrences of the keys (usually constants)."""
    if not mapping:
        return t
    memo = {}

    def go(t, m):
        if t in m:
            return m[t]
        if isinstance(t, App):
            key = (id(t), id(m))
            hit = memo.get(key)
            if hit is not None:
                return hit
            args = tuple(go(a, m) for a in t.args)
            if all(x is y for x, y in zip(args, t.args)):
                r = t
            else:
                r = mk(t.op, args, t.sort)
            memo[key] = r
            return r
        if isinstance(t, Quant):
            inner = {k: v for k, v in m.items() if k not in t.vars}
            body = go(t.body, inner)
            pats = tuple(tuple(go(p, inner) for p in ps) for ps in t.patterns)
            return quant(t.kind, t.vars, body, pats)
        return t

    return go(t, mapping)


def quant(kind, vars, body, patterns=()):
    if isinstance(body, BoolVal):
        return body
    used = free_consts(body)
    vars = tuple(v for v in vars if v in used)
    if not vars:
        return body
    patterns = tuple(p for p in patterns
                     if all(v in set().union(*(free_consts(x) for x in p))
                            for v in vars))
    return Quant(kind, vars, body, patterns)


def free_consts(t: Term) -> set:
    out = set()

    def go(t, bound):
        if isinstance(t, Const):
            if t not in bound:
                out.add(t)
        elif isinstance(t, App):
            for a in t.args:
                go(a, bound)
        elif isinstance(t, Quant):
            b = bound | set(t.vars)
            go(t.body, b)
    go(t, frozenset())
    return out


def subterms(t: Term):
    """All subterms, including under binders (pre-order, deduplicated)."""
    seen = set()
    stack = [t]
    while stack:
        x = stack.pop()
        if x in seen:
            continue
        seen.add(x)
        yield x
        if isinstance(x, App):
            stack.extend(reversed(x.args))
        elif isinstance(x, Quant):
            stack.append(x.body)
            for p in x.patterns:
                stack.extend(p)


def has_quantifier(t: Term) -> bool:
    return any(isinstance(x, Quant) for x in subterms(t))


def conjuncts(t: Term) -> Tuple[Term, ...]:
    if isinstance(t, App) and t.op == "and":
        out = []
        for a in t.args:
            out.extend(conjuncts(a))
        return tuple(out)
    return (t,)
