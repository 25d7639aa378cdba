"""Reference interpreter for the executable subset, with optional runtime
contract checking.  Also evaluates logic formulas under solver models, which
is how candidate counterexamples are confirmed."""

from __future__ import annotations

import itertools
import operator
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List

from minivc import logic as L
from minivc.logic import euclid_div, euclid_mod
from minivc.resolve import TypedProgram, VarInfo
from minivc.syntax import ast as A

DEFAULT_BUDGET = 10 ** 7


# ---------------------------------------------------------------- values

class ArrayRef:
    """A heap-allocated array.  ``cells`` may be a caller-owned list, which
    then observes all updates."""
    _ids = itertools.count(1)

    def __init__(self, cells):
        self.cells = cells
        self.id = next(ArrayRef._ids)

    def __len__(self):
        return len(self.cells)

    def __repr__(self):
        return f"array#{self.id}{self.cells!r}"


class Multiset:
    __slots__ = ("counts",)

    def __init__(self, items=()):
        self.counts = Counter(items)

    def __eq__(self, other):
        return isinstance(other, Multiset) and +self.counts == +other.counts

    def __hash__(self):
        return hash(frozenset((+self.counts).items()))

    def count(self, x):
        return self.counts.get(x, 0)

    def get(self, x):
        return self.count(x)

    def __repr__(self):
        items = sorted(self.counts.elements(), key=repr)
        return "multiset{" + ", ".join(map(repr, items)) + "}"


@dataclass(frozen=True)
class DatatypeValue:
    ctor: str
    fields: tuple = ()
    names: tuple = ()

    def field(self, name):
        return self.fields[self.names.index(name)]

    def __repr__(self):
        if not self.fields:
            return self.ctor
        return f"{self.ctor}({', '.join(map(repr, self.fields))})"


class RuntimeFault(Exception):
    KINDS = ("precondition", "postcondition", "invariant", "assert", "bounds",
             "null", "division", "nontermination-budget", "unevaluable")

    def __init__(self, kind, span, message=""):
        super().__init__(f"{span}: {kind}: {message}" if message else f"{span}: {kind}")
        self.kind = kind
        self.span = span
        self.message = message


class Unevaluable(Exception):
    pass


# ---------------------------------------------------------------- interpreter

class Interpreter:
    def __init__(self, tp: TypedProgram, check_contracts=True, budget=DEFAULT_BUDGET):
        self.tp = tp
        self.check = check_contracts
        self.budget = budget
        self.steps = 0
        self.arrays: List[ArrayRef] = []

    def tick(self, span):
        self.steps += 1
        if self.steps > self.budget:
            raise RuntimeFault("nontermination-budget", span, "step budget exhausted")

    def snapshot(self):
        return {a.id: list(a.cells) for a in self.arrays}

    def track(self, v):
        if isinstance(v, ArrayRef) and all(a is not v for a in self.arrays):
            self.arrays.append(v)
        return v

    # -- expressions

    def eval(self, e, env, old=None):
        """Evaluate ``e``; ``old`` holds array contents at method entry."""
        hit = _COMPILED.get(id(e))
        if hit is None or hit[0] is not e:
            hit = (e, _compile(e))
            _COMPILED[id(e)] = hit
        return hit[1](self, env, old)

    def ev_lit(self, e, env, old):
        return e.value

    def ev_null(self, e, env, old):
        return None

    def ev_var(self, e, env, old):
        try:
            return env[e.name]
        except KeyError:
            pass
        ref = self.tp.refs.get(id(e))
        if isinstance(ref, tuple) and ref[0] == "ctor":
            return DatatypeValue(e.name)
        raise Unevaluable(f"unbound variable {e.name}")

    def ev_unary(self, e, env, old):
        v = self.eval(e.operand, env, old)
        return (not v) if e.op == "!" else -v

    def ev_index(self, e, env, old):
        base = self.eval(e.base, env, old)
        i = self.eval(e.index, env, old)
        cells = self.cells(base, e, old)
        if not 0 <= i < len(cells):
            raise RuntimeFault("bounds", e.span, f"index {i} out of range")
        return cells[i]

    def ev_length(self, e, env, old):
        base = self.eval(e.base, env, old)
        if base is None:
            raise RuntimeFault("null", e.span, "null dereference")
        return len(base.cells)

    def ev_slice(self, e, env, old):
        base = self.eval(e.base, env, old)
        seq = self.cells(base, e, old)
        lo = 0 if e.lo is None else self.eval(e.lo, env, old)
        hi = len(seq) if e.hi is None else self.eval(e.hi, env, old)
        if not 0 <= lo <= hi <= len(seq):
            raise RuntimeFault("bounds", e.span, f"slice [{lo}..{hi}] out of range")
        return tuple(seq[lo:hi])

    def ev_multiset(self, e, env, old):
        return Multiset(self.eval(e.arg, env, old))

    def ev_old(self, e, env, old):
        if old is None:
            raise Unevaluable("old() without a pre-state")
        return self.eval(e.expr, env, _OldView(old))

    def ev_destructor(self, e, env, old):
        v = self.eval(e.base, env, old)
        if e.name not in v.names:
            raise RuntimeFault("precondition", e.span,
                               f"destructor '{e.name}' applied to {v.ctor}")
        return v.field(e.name)

    def ev_is(self, e, env, old):
        return self.eval(e.base, env, old).ctor == e.ctor

    def ev_if(self, e, env, old):
        c = self.eval(e.cond, env, old)
        return self.eval(e.then if c else e.els, env, old)

    def cells(self, base, e, old):
        if base is None:
            raise RuntimeFault("null", e.span, "null dereference")
        if isinstance(base, tuple):
            return base
        if isinstance(old, _OldView) and base.id in old.contents:
            return old.contents[base.id]
        return base.cells

    def binary(self, e, env, old):
        op = e.op
        a = self.eval(e.left, env, old)
        if op == "&&":
            return a and self.eval(e.right, env, old)
        if op == "||":
            return a or self.eval(e.right, env, old)
        if op == "==>":
            return (not a) or self.eval(e.right, env, old)
        b = self.eval(e.right, env, old)
        if op in ("/", "%"):
            if b == 0:
                raise RuntimeFault("division", e.span, "division by zero")
            return euclid_div(a, b) if op == "/" else euclid_mod(a, b)
        return _BINOPS[op](a, b)

    def fn_call(self, e, env, old):
        return self.apply_fn(e, [self.eval(a, env, old) for a in e.args], old)

    def apply_fn(self, e, args, old):
        ref = self.tp.refs[id(e)]
        if ref[0] == "ctor":
            _, dt, ctor = ref
            return DatatypeValue(ctor.name, tuple(args), tuple(f.name for f in ctor.fields))
        return self.call_fn(ref[1], args, e.span, old)

    def call_fn(self, fn: A.Function, args, span, old=None):
        self.tick(span)
        env = dict(zip((p.name for p in fn.params), args))
        for r in fn.requires:
            if not self.eval(r, env, old):
                raise RuntimeFault("precondition", span,
                                   f"precondition of '{fn.name}' violated")
        if fn.body is None:
            raise Unevaluable(f"function '{fn.name}' has no body")
        return self.eval(fn.body, env, old)

    def quantifier(self, e, env, old):
        names = [bv.name for bv in e.vars]
        ranges = _bound_ranges(e, lambda x: self.eval(x, env, old))
        if ranges is None:
            raise RuntimeFault("unevaluable", e.span, "unbounded quantifier")
        want = e.kind == "forall"
        inner = dict(env)
        body = e.body
        for values in itertools.product(*ranges):
            self.tick(e.span)
            for n, v in zip(names, values):
                inner[n] = v
            if bool(self.eval(body, inner, old)) != want:
                return not want
        return want

    # -- statements

    def exec_block(self, stmts, env, old):
        for s in stmts:
            self.exec(s, env, old)

    def ghost_target(self, t):
        info = self.tp.refs.get(id(t))
        return isinstance(info, VarInfo) and info.ghost

    def exec(self, s, env, old):
        self.tick(s.span)
        if isinstance(s, A.VarDecl):
            if s.ghost and not self.check:
                return
            if s.init is None:
                for n in s.names:
                    env.setdefault(n, None)
                return
            vals = [self.eval(x, env, old) for x in s.init]
            for n, v in zip(s.names, vals):
                env[n] = self.track(v)
        elif isinstance(s, A.Assign):
            if not self.check and all(self.ghost_target(t) for t in s.lhs):
                return
            targets = []
            for lhs in s.lhs:
                if isinstance(lhs, A.Index):
                    arr = self.eval(lhs.base, env, old)
                    i = self.eval(lhs.index, env, old)
                    if arr is None:
                        raise RuntimeFault("null", lhs.span, "null dereference")
                    if not 0 <= i < len(arr.cells):
                        raise RuntimeFault("bounds", lhs.span, f"index {i} out of range")
                    targets.append((arr, i))
                else:
                    targets.append(lhs.name)
            vals = [self.eval(x, env, old) for x in s.rhs]
            for t, v in zip(targets, vals):
                if isinstance(t, tuple):
                    t[0].cells[t[1]] = v
                else:
                    env[t] = self.track(v)
        elif isinstance(s, A.ArrayAlloc):
            n = self.eval(s.length, env, old)
            if n < 0:
                raise RuntimeFault("bounds", s.span, "negative array size")
            env[s.target.name] = self.track(ArrayRef([_default(s.elem_type)] * n))
        elif isinstance(s, A.If):
            if self.eval(s.cond, env, old):
                self.exec_block(s.then, env, old)
            elif s.els:
                self.exec_block(s.els, env, old)
        elif isinstance(s, A.While):
            self.exec_while(s, env, old)
        elif isinstance(s, A.Call):
            self.exec_call(s, env, old)
        elif isinstance(s, (A.Assert, A.Assume)):
            if self.check and not self.eval(s.expr, env, old):
                raise RuntimeFault("assert", s.span, "assertion violation")
        elif isinstance(s, A.Calc):
            return
        elif isinstance(s, A.Match):
            v = self.eval(s.scrutinee, env, old)
            for case in s.cases:
                if case.ctor == v.ctor:
                    env.update(zip(case.binders, v.fields))
                    self.exec_block(case.body, env, old)
                    return
        elif isinstance(s, A.Block):
            self.exec_block(s.stmts, env, old)
        else:
            raise Unevaluable(type(s).__name__)

    def exec_while(self, w, env, old):
        while True:
            if self.check:
                for inv in w.invariants:
                    if not self.eval(inv, env, old):
                        raise RuntimeFault("invariant", inv.span, "loop invariant violated")
            if not self.eval(w.guard, env, old):
                return
            self.tick(w.span)
            self.exec_block(w.body, env, old)

    def exec_call(self, s: A.Call, env, old):
        callee = self.tp.signatures[s.callee]
        if callee.ghostly:
            return
        args = [self.eval(a, env, old) for a in s.args]
        outs = self.call_method(callee, args, s.span)
        for t, v in zip(s.targets, outs):
            env[t.name] = self.track(v)

    def call_method(self, m: A.Method, args, span):
        if m.body is None:
            raise RuntimeFault("unevaluable", span, f"method '{m.name}' has no body")
        env = dict(zip((p.name for p in m.ins), args))
        for v in args:
            self.track(v)
        pre = self.snapshot()
        if self.check:
            for r in m.requires:
                if not self.eval(r, env, pre):
                    raise RuntimeFault("precondition", r.span,
                                       f"precondition of '{m.name}' violated")
        for p in m.outs:
            env[p.name] = None
        self.exec_block(m.body, env, pre)
        if self.check:
            for e in m.ensures:
                if not self.eval(e, env, pre):
                    raise RuntimeFault("postcondition", e.span,
                                       f"postcondition of '{m.name}' violated")
        return [env[p.name] for p in m.outs]


_BINOPS = {
    "+": operator.add, "-": operator.sub, "*": operator.mul,
    "<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge,
    "==": lambda a, b: _same(a, b), "!=": lambda a, b: not _same(a, b),
    "<==>": operator.eq, "<==": lambda a, b: a or not b,
}

_EVAL = {
    A.IntLit: Interpreter.ev_lit, A.BoolLit: Interpreter.ev_lit,
    A.NullLit: Interpreter.ev_null, A.Var: Interpreter.ev_var,
    A.Binary: Interpreter.binary, A.Unary: Interpreter.ev_unary,
    A.FnCall: Interpreter.fn_call, A.Index: Interpreter.ev_index,
    A.ArrayLength: Interpreter.ev_length, A.Slice: Interpreter.ev_slice,
    A.MultisetOf: Interpreter.ev_multiset, A.Old: Interpreter.ev_old,
    A.Quantifier: Interpreter.quantifier, A.Destructor: Interpreter.ev_destructor,
    A.IsCtor: Interpreter.ev_is, A.IfExpr: Interpreter.ev_if,
}


# Expressions are compiled once into closures ``f(interpreter, env, old)``;
# rare node kinds fall back to the methods above.
_COMPILED: Dict[int, tuple] = {}


def _compile(e):
    t = type(e)
    if t is A.IntLit or t is A.BoolLit:
        v = e.value
        return lambda it, env, old: v
    if t is A.Var:
        name = e.name

        def var(it, env, old):
            try:
                return env[name]
            except KeyError:
                return it.ev_var(e, env, old)
        return var
    if t is A.Binary:
        op = e.op
        left, right = _compile(e.left), _compile(e.right)
        if op == "&&":
            return lambda it, env, old: left(it, env, old) and right(it, env, old)
        if op == "||":
            return lambda it, env, old: left(it, env, old) or right(it, env, old)
        if op == "==>":
            return lambda it, env, old: (not left(it, env, old)) or right(it, env, old)
        if op in ("/", "%"):
            fn = euclid_div if op == "/" else euclid_mod

            def div(it, env, old):
                a, b = left(it, env, old), right(it, env, old)
                if b == 0:
                    raise RuntimeFault("division", e.span, "division by zero")
                return fn(a, b)
            return div
        fn = _BINOPS[op]
        return lambda it, env, old: fn(left(it, env, old), right(it, env, old))
    if t is A.Unary:
        sub = _compile(e.operand)
        if e.op == "!":
            return lambda it, env, old: not sub(it, env, old)
        return lambda it, env, old: -sub(it, env, old)
    if t is A.Index:
        base, index = _compile(e.base), _compile(e.index)

        def idx(it, env, old):
            cells = it.cells(base(it, env, old), e, old)
            i = index(it, env, old)
            if not 0 <= i < len(cells):
                raise RuntimeFault("bounds", e.span, f"index {i} out of range")
            return cells[i]
        return idx
    if t is A.FnCall:
        args = [_compile(a) for a in e.args]
        return lambda it, env, old: it.apply_fn(e, [a(it, env, old) for a in args], old)
    if t is A.IfExpr:
        c, a, b = _compile(e.cond), _compile(e.then), _compile(e.els)
        return lambda it, env, old: a(it, env, old) if c(it, env, old) else b(it, env, old)
    f = _EVAL.get(t)
    if f is None:
        def bad(it, env, old):
            raise Unevaluable(t.__name__)
        return bad
    return lambda it, env, old: f(it, e, env, old)


class _OldView(dict):
    """Marker for evaluation in the pre-state."""

    def __init__(self, contents):
        super().__init__()
        self.contents = contents.contents if isinstance(contents, _OldView) else contents


def _same(a, b):
    if isinstance(a, ArrayRef) or isinstance(b, ArrayRef):
        return a is b
    return a == b


def _default(t: A.TypeRef):
    return {"int": 0, "bool": False}.get(t.name)


_SPECS: Dict[int, tuple] = {}


def _bound_specs(q):
    """Comparisons in the antecedent (or conjunction) of a quantifier body
    that bound a bound variable by an expression free of bound variables:
    ``[(expr, is_upper, strict)]``.  Cached per node."""
    hit = _SPECS.get(id(q))
    if hit is not None and hit[0] is q:
        return hit[1]
    names = {bv.name for bv in q.vars}
    guard = q.body
    if isinstance(guard, A.Binary) and guard.op == "==>":
        guard = guard.left
    facts = []

    def split(e):
        if isinstance(e, A.Binary) and e.op == "&&":
            split(e.left)
            split(e.right)
        else:
            facts.append(e)
    split(guard)
    specs = []
    for f in facts:
        if not (isinstance(f, A.Binary) and f.op in ("<", "<=", ">", ">=")):
            continue
        left, right, op = f.left, f.right, f.op
        if op in (">", ">="):
            left, right, op = right, left, {">": "<", ">=": "<="}[op]
        for side, other, upper in ((left, right, True), (right, left, False)):
            if isinstance(side, A.Var) and side.name in names \
                    and not _mentions(other, names):
                specs.append((other, upper, op == "<"))
    _SPECS[id(q)] = (q, specs)
    return specs


def _bound_ranges(q, evaluate):
    """Finite candidate ranges (a common superset) for the bound variables."""
    lows, highs = [], []
    for expr, upper, strict in _bound_specs(q):
        try:
            v = evaluate(expr)
        except (RuntimeFault, Unevaluable, KeyError):
            continue
        if upper:
            highs.append(v - 1 if strict else v)
        else:
            lows.append(v + 1 if strict else v)
    if not lows or not highs:
        return None
    lo, hi = min(lows), max(highs)
    if hi - lo > 100_000:
        return None
    return [range(lo, hi + 1) for _ in q.vars]


def _mentions(e, names):
    if isinstance(e, A.Var):
        return e.name in names
    from minivc.resolve import children
    return any(_mentions(c, names) for c in children(e))


# ---------------------------------------------------------------- entry points

def _as_value(v):
    if isinstance(v, list):
        return ArrayRef(v)
    return v


def run_method(tp: TypedProgram, decl, args, check_contracts=True,
               budget=DEFAULT_BUDGET):
    """Run a method; returns its out-parameter values.  Python lists passed
    for array parameters are used as the array storage and see updates."""
    if isinstance(decl, str):
        decl = tp.signatures[decl]
    it = Interpreter(tp, check_contracts, budget)
    return it.call_method(decl, [_as_value(a) for a in args], decl.span)


def call_function(tp: TypedProgram, decl, args, budget=DEFAULT_BUDGET):
    if isinstance(decl, str):
        decl = tp.signatures[decl]
    it = Interpreter(tp, True, budget)
    return it.call_fn(decl, [_as_value(a) for a in args], decl.span)


def eval_expr(e, env, tp: TypedProgram, old=None, check_contracts=True):
    it = Interpreter(tp, check_contracts)
    env = {k: _as_value(v) for k, v in env.items()}
    for v in env.values():
        it.track(v)
    return it.eval(e, env, old)


# ---------------------------------------------------------------- formulas

class _ModelSeq(tuple):
    pass


def eval_formula(t: L.Term, model, theory=None, env=None, fuel=2):
    """Evaluate a logic term under a solver model (``smt.Model``)."""
    from minivc import smt
    env = env or {}

    def ev(t):
        if isinstance(t, L.Const):
            if t in env:
                return env[t]
            try:
                return model.lookup(t.name)
            except KeyError:
                if t.sort == L.INT:
                    return 0
                if t.sort == L.BOOL:
                    return False
                if t.sort == L.FUEL:
                    v = smt.ModelDt("FZ")
                    for _ in range(fuel):
                        v = smt.ModelDt("FS", (v,))
                    return v
                if t.sort.name == "Array":
                    return smt.ModelArray(None)
                raise Unevaluable(f"no model value for {t.name}")
        if isinstance(t, (L.IntVal, L.BoolVal)):
            return t.value
        if isinstance(t, L.Quant):
            return quant(t)
        op, args = t.op, t.args
        if op == "and":
            return all(ev(a) for a in args)
        if op == "or":
            return any(ev(a) for a in args)
        if op == "=>":
            return (not ev(args[0])) or ev(args[1])
        if op == "ite":
            return ev(args[1]) if ev(args[0]) else ev(args[2])
        vals = [ev(a) for a in args]
        if op == "not":
            return not vals[0]
        if op == "=":
            return _model_eq(vals[0], vals[1])
        if op == "distinct":
            return len(set(vals)) == len(vals)
        if op in ("+", "-", "*"):
            a, b = vals
            return a + b if op == "+" else a - b if op == "-" else a * b
        if op == "neg":
            return -vals[0]
        if op in ("div", "mod"):
            if vals[1] == 0:
                return model.apply(op + "0", vals) if op + "0" in model.funs else 0
            return (euclid_div if op == "div" else euclid_mod)(*vals)
        if op in ("<", "<=", ">", ">="):
            a, b = vals
            return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]
        if op == "select":
            arr, k = vals
            if isinstance(arr, (Multiset, smt.ModelArray)):
                return arr.get(k)
            raise Unevaluable("select on non-array")
        if op == "store":
            arr, k, v = vals
            if isinstance(arr, smt.ModelArray):
                return arr.store(k, v)
            raise Unevaluable("store on non-array")
        if op.startswith("is:"):
            v = vals[0]
            return isinstance(v, smt.ModelDt) and v.ctor == op[3:]
        if op == "FZ":
            return smt.ModelDt("FZ")
        if op == "FS":
            return smt.ModelDt("FS", (vals[0],))
        if theory is not None:
            r = theory_op(op, vals, t)
            if r is not _MISSING:
                return r
        try:
            return model.apply(op, vals)
        except KeyError:
            raise Unevaluable(f"no interpretation for {op}")

    def theory_op(op, vals, t):
        if op in theory.functions:
            fd = theory.functions[op]
            if fd.decl.body is None:
                return _MISSING      # uninterpreted: any model value is genuine
            user = vals[1 + len(fd.heaps):]
            if fd.heaps or not all(isinstance(v, (int, bool)) for v in user):
                raise Unevaluable(f"cannot evaluate {op}")
            try:
                return call_function(theory.tp, fd.decl, list(user), budget=200_000)
            except RuntimeFault as exc:
                if exc.kind == "precondition" and exc.span == fd.decl.span:
                    return _MISSING  # outside the domain: unconstrained
                raise Unevaluable(str(exc))
            except RecursionError:
                raise Unevaluable(f"{op} too deep")
        if op.startswith("Seq_"):
            kind = op.rsplit(".", 1)[1]
            if kind == "slice":
                c, lo, hi = vals
                if hi - lo > 100_000:
                    raise Unevaluable("slice too long")
                if not isinstance(c, smt.ModelArray):
                    raise Unevaluable("slice of non-array")
                return _ModelSeq(c.get(i) for i in range(lo, max(lo, hi)))
            s = vals[0]
            if isinstance(s, _ModelSeq):
                if kind == "len":
                    return len(s)
                if kind == "at":
                    k = vals[1]
                    if 0 <= k < len(s):
                        return s[k]
                    return _MISSING
                if kind == "ms":
                    return Multiset(s)
            return _MISSING
        if op.endswith(".$rank"):
            return _rank(vals[0], theory)
        sort_name, _, member = op.rpartition(".")
        inst = theory.datatypes.get(sort_name)
        if inst is not None:
            for cname, fields, _src in inst.ctors:
                if cname == op:
                    return smt.ModelDt(op, tuple(vals))
                for k, (fname, _fs) in enumerate(fields):
                    if fname == op:
                        v = vals[0]
                        if isinstance(v, smt.ModelDt) and v.ctor == cname:
                            return v.args[k]
                        return _MISSING
        return _MISSING

    def quant(q):
        ranges = _ir_ranges(q, ev)
        if ranges is None:
            raise Unevaluable("unbounded quantifier")
        want = q.kind == "forall"
        for values in itertools.product(*ranges):
            for v, x in zip(q.vars, values):
                env[v] = x
            if bool(ev(q.body)) != want:
                for v in q.vars:
                    env.pop(v, None)
                return not want
        for v in q.vars:
            env.pop(v, None)
        return want

    return bool(ev(t)) if t.sort == L.BOOL else ev(t)


_MISSING = object()


def _rank(v, theory):
    from minivc import smt
    if not isinstance(v, smt.ModelDt):
        raise Unevaluable("rank of non-datatype")
    return (1 if v.args else 0) + sum(_rank(a, theory) for a in v.args
                                      if isinstance(a, smt.ModelDt))


def _model_eq(a, b):
    from minivc import smt
    if isinstance(a, smt.ModelArray) or isinstance(b, smt.ModelArray):
        if isinstance(a, smt.ModelArray) and isinstance(b, smt.ModelArray) \
                and a.fn is None and b.fn is None:
            keys = set(a.entries) | set(b.entries)
            return a.default == b.default and all(a.get(k) == b.get(k) for k in keys)
        raise Unevaluable("array equality")
    if isinstance(a, Multiset) and isinstance(b, Multiset):
        return a == b
    return a == b


def _ir_ranges(q, ev):
    body = q.body
    guard = body.args[0] if isinstance(body, L.App) and body.op == "=>" else body
    facts = L.conjuncts(guard)
    lows, highs = [], []
    qv = set(q.vars)
    for f in facts:
        if not (isinstance(f, L.App) and f.op in ("<", "<=", ">", ">=")):
            continue
        a, b = f.args
        op = f.op
        if op in (">", ">="):
            a, b, op = b, a, {">": "<", ">=": "<="}[op]
        for side, other, upper in ((a, b, True), (b, a, False)):
            if side in qv and not (L.free_consts(other) & qv):
                try:
                    v = ev(other)
                except Unevaluable:
                    continue
                if upper:
                    highs.append(v - 1 if op == "<" else v)
                else:
                    lows.append(v + 1 if op == "<" else v)
    if not lows or not highs or any(v.sort != L.INT for v in q.vars):
        return None
    lo, hi = min(lows), max(highs)
    if hi - lo > 10_000:
        return None
    return [range(lo, hi + 1) for _ in q.vars]
