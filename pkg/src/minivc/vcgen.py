"""Verification-condition generation.

Method bodies are executed symbolically from entry to exit.  The state maps
each variable to a term and each heap (one per array element sort) to a term;
assignment is substitution into that map, so the obligation produced for a
check is the weakest precondition of the check restricted to the path that
reaches it.  Conditionals are merged with ``ite`` and guarded hypotheses,
which keeps one obligation per check site.
"""

from __future__ import annotations

import copy
import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from minivc import logic as L
from minivc import termination
from minivc.diagnostics import DiagnosticError, error
from minivc.logic import BOOL, FUEL, INT, REF, App, Const, IntVal, Sort
from minivc.resolve import (ArrayType, BoolType, DatatypeType, IntType,
                            MultisetType, NullType, SeqType, TypedProgram,
                            TypeVar, prune, substitute_type)
from minivc.syntax import ast as A

KINDS = (
    "precondition-at-call", "postcondition", "invariant-entry",
    "invariant-maintenance", "assertion", "index-bounds", "null-deref",
    "division", "function-precondition", "decreases-decrease",
    "decreases-bounded", "calc-step", "frame-postcondition",
)

LABELS = {
    "precondition-at-call": "a precondition for this call might not hold",
    "postcondition": "a postcondition might not hold on this return path",
    "invariant-entry": "this loop invariant might not hold on entry",
    "invariant-maintenance": "this loop invariant might not be maintained by the loop",
    "assertion": "assertion violation",
    "index-bounds": "index out of range",
    "null-deref": "target object might be null",
    "division": "possible division by zero",
    "function-precondition": "possible violation of function precondition",
    "decreases-decrease": "decreases expression might not decrease",
    "decreases-bounded": "decreases expression must be bounded below by 0",
    "calc-step": "the calculation step might not hold",
    "frame-postcondition": "an array outside the modifies clause might have changed",
}

FUEL_TOP = Const("$fuel", FUEL)
NULL = Const("null", REF)


class Unsupported(Exception):
    """Construct outside the encodable fragment."""


@dataclass
class Obligation:
    goal: L.Term
    hypotheses: List[L.Term]
    kind: str
    span: object
    label: str
    decl: str = ""
    fuel: int = 2
    theory: object = field(default=None, repr=False, compare=False)
    index: int = 0
    note: str = ""

    def formula(self):
        return L.Implies(L.conj(self.hypotheses), self.goal)


# ---------------------------------------------------------------- theory

@dataclass
class DatatypeInstance:
    sort: Sort
    decl: A.Datatype
    args: tuple
    ctors: list      # [(smt ctor name, [(smt field name, Sort)], source ctor)]

    def rank_name(self):
        return f"{self.sort.name}.$rank"


@dataclass
class FunDef:
    name: str
    decl: A.Function
    params: list                  # [Const]
    heaps: list                   # [Const]
    fuel_var: Optional[Const]
    pre: L.Term = None
    body: L.Term = None
    result: Sort = None

    @property
    def recursive(self):
        return self.fuel_var is not None


class Theory:
    """Program-wide symbols: datatype instances, seq element sorts and
    recursive function definitions discovered during encoding."""

    def __init__(self, tp: TypedProgram):
        self.tp = tp
        self.datatypes: Dict[str, DatatypeInstance] = {}
        self.functions: Dict[str, FunDef] = {}
        self.seq_elems = set()
        self.tvars = set()
        self._eval_cache = {}

    # sorts
    def mangle(self, t) -> str:
        t = prune(t)
        if isinstance(t, IntType):
            return "Int"
        if isinstance(t, BoolType):
            return "Bool"
        if isinstance(t, (ArrayType, NullType)):
            return "Ref"
        if isinstance(t, SeqType):
            return f"Seq_{self.mangle(t.elem)}"
        if isinstance(t, MultisetType):
            return f"Ms_{self.mangle(t.elem)}"
        if isinstance(t, DatatypeType):
            return "_".join([t.name] + [self.mangle(a) for a in t.args])
        if isinstance(t, TypeVar):
            return f"tv_{t.name}"
        raise Unsupported(f"type {t}")

    def sort_of(self, t) -> Sort:
        t = prune(t)
        if isinstance(t, IntType):
            return INT
        if isinstance(t, BoolType):
            return BOOL
        if isinstance(t, (ArrayType, NullType)):
            if isinstance(t, ArrayType):
                self.sort_of(t.elem)
            return REF
        if isinstance(t, SeqType):
            e = self.sort_of(t.elem)
            self.seq_elems.add(e)
            return Sort(self.mangle(t))
        if isinstance(t, MultisetType):
            return L.array_sort(self.sort_of(t.elem), INT)
        if isinstance(t, TypeVar):
            s = Sort(self.mangle(t))
            self.tvars.add(s)
            return s
        if isinstance(t, DatatypeType):
            name = self.mangle(t)
            if name not in self.datatypes:
                decl = self.tp.signatures[t.name]
                inst = DatatypeInstance(Sort(name), decl, t.args, [])
                self.datatypes[name] = inst
                sub = dict(zip(decl.type_params, t.args))
                r = _TypeOfRef(self.tp)
                for c in decl.ctors:
                    fields = []
                    for f in c.fields:
                        ft = substitute_type(r(f.type, decl.type_params), sub)
                        fields.append((f"{name}.{f.name}", self.sort_of(ft)))
                    inst.ctors.append((f"{name}.{c.name}", fields, c))
            return self.datatypes[name].sort
        raise Unsupported(f"type {t}")

    def elem_sort_of_seq(self, s: Sort) -> Sort:
        for e in self.seq_elems:
            if seq_sort_name(e) == s.name:
                return e
        raise KeyError(s)

    # ground evaluation of recursive functions on literals
    def evaluate(self, fname, args):
        key = (fname, args)
        if key in self._eval_cache:
            return self._eval_cache[key]
        fd = self.functions[fname]
        from minivc import interp
        try:
            v = interp.call_function(self.tp, fd.decl, list(args),
                                     budget=200_000)
        except Exception:
            v = None
        if isinstance(v, bool):
            res = L.BoolVal(v)
        elif isinstance(v, int):
            res = L.IntVal(v)
        else:
            res = None
        self._eval_cache[key] = res
        return res


def seq_sort_name(elem: Sort) -> str:
    return "Seq_" + _sort_tag(elem)


def _sort_tag(s: Sort) -> str:
    if s.args:
        return s.name + "_" + "_".join(_sort_tag(a) for a in s.args)
    return s.name


class _TypeOfRef:
    """TypeRef → Type without a resolver instance (inputs already checked)."""

    def __init__(self, tp):
        self.tp = tp

    def __call__(self, t: A.TypeRef, tparams):
        args = [self(a, tparams) for a in t.args]
        n = t.name
        if n in ("int", "nat"):
            return IntType()
        if n == "bool":
            return BoolType()
        if n == "array":
            return ArrayType(args[0])
        if n == "seq":
            return SeqType(args[0])
        if n == "multiset":
            return MultisetType(args[0])
        if n in tparams:
            return TypeVar(n)
        return DatatypeType(n, tuple(args))


# ---------------------------------------------------------------- state

def hold(elem: Sort) -> Const:
    return Const(f"$Hold_{_sort_tag(elem)}", L.array_sort(REF, L.array_sort(INT, elem)))


class State:
    __slots__ = ("env", "heaps", "old", "hyps", "tinst")

    def __init__(self, env=None, heaps=None, old=None, hyps=None, tinst=None):
        self.env = dict(env or {})
        self.heaps = dict(heaps or {})
        self.old = dict(old or {})
        self.hyps = list(hyps or [])
        self.tinst = tinst or {}

    def copy(self):
        return State(self.env, self.heaps, self.old, self.hyps, self.tinst)

    def heap(self, elem: Sort):
        return self.heaps.get(elem) or hold(elem)

    def old_heap(self, elem: Sort):
        return self.old.get(elem) or hold(elem)

    def old_view(self):
        return State(self.env, self.old, self.old, self.hyps, self.tinst)

    def bind(self, extra):
        s = State(self.env, self.heaps, self.old, self.hyps, self.tinst)
        s.env.update(extra)
        return s


class _Order:
    """Rank and prefix helpers handed to the termination module."""

    def __init__(self, enc):
        self.enc = enc

    def rank(self, t):
        inst = self.enc.theory.datatypes[t.sort.name]
        return App(inst.rank_name(), (t,), INT)

    def proper_prefix(self, new, old):
        e = self.enc.theory.elem_sort_of_seq(new.sort)
        ln, lo = self.enc.seq_len(new, e), self.enc.seq_len(old, e)
        k = self.enc.fresh_bound("k", INT)
        body = L.Implies(L.And(L.mk("<=", (IntVal(0), k)), L.mk("<", (k, ln))),
                         L.Eq(self.enc.seq_at(new, k, e), self.enc.seq_at(old, k, e)))
        return L.And(L.mk("<", (ln, lo)), L.quant("forall", (k,), body))


# ---------------------------------------------------------------- encoder

ARITH_OPS = {"+": "+", "-": "-", "*": "*", "/": "div", "%": "mod"}
CMP_OPS = {"<": "<", "<=": "<=", ">": ">", ">=": ">="}


class Encoder:
    def __init__(self, theory: Theory, decl, fuel: int = 2):
        self.theory = theory
        self.tp = theory.tp
        self.decl = decl
        self.fuel = fuel
        self.obs: List[Obligation] = []
        self.counter = itertools.count(1)
        self.defining = None          # FunDef whose body is being encoded
        self.check_termination = False
        self.caller_metric = None     # (Metric, [terms]) of the current decl
        self.order = _Order(self)
        self.warnings = []

    # -- names and sorts

    def fresh(self, base, sort):
        return Const(f"{base}@{next(self.counter)}", sort)

    def fresh_bound(self, base, sort):
        return Const(f"{base}#{next(self.counter)}", sort)

    def type_of(self, e, st=None):
        t = self.tp.types[id(e)]
        if st is not None and st.tinst:
            t = substitute_type(t, st.tinst)
        return t

    def sort(self, e, st=None):
        return self.theory.sort_of(self.type_of(e, st))

    def elem_sort(self, arr_expr, st):
        t = prune(self.type_of(arr_expr, st))
        if isinstance(t, NullType):
            raise Unsupported("null has no element type")
        return self.theory.sort_of(t.elem)

    def var_sort(self, name, st=None):
        info = self.tp.variables[self.decl.name][name]
        t = info.type
        if st is not None and st.tinst:
            t = substitute_type(t, st.tinst)
        return self.theory.sort_of(t)

    # -- heap helpers

    @staticmethod
    def length(a):
        return App("len", (a,), INT)

    @staticmethod
    def contents(heap, a):
        return L.mk("select", (heap, a))

    def slice(self, contents, lo, hi, elem):
        self.theory.seq_elems.add(elem)
        return App(f"{seq_sort_name(elem)}.slice", (contents, lo, hi),
                   Sort(seq_sort_name(elem)))

    def seq_len(self, s, elem):
        return App(f"{seq_sort_name(elem)}.len", (s,), INT)

    def seq_at(self, s, k, elem):
        return App(f"{seq_sort_name(elem)}.at", (s, k), elem)

    def multiset_of(self, s, elem):
        return App(f"{seq_sort_name(elem)}.ms", (s,), L.array_sort(elem, INT))

    # -- obligations

    def emit(self, kind, goal, st, span, extra=(), label=None, note=""):
        ob = Obligation(goal, st.hyps + list(extra), kind, span,
                        label or LABELS[kind], self.decl.name, self.fuel,
                        self.theory, len(self.obs), note)
        self.obs.append(ob)
        return ob

    # -- expressions

    def tr(self, e, st: State) -> L.Term:
        if isinstance(e, A.IntLit):
            return IntVal(e.value)
        if isinstance(e, A.BoolLit):
            return L.BoolVal(e.value)
        if isinstance(e, A.NullLit):
            return NULL
        if isinstance(e, A.Var):
            if e.name in st.env:
                return st.env[e.name]
            ref = self.tp.refs.get(id(e))
            if isinstance(ref, tuple) and ref[0] == "ctor":
                s = self.sort(e, st)
                return App(f"{s.name}.{e.name}", (), s)
            raise KeyError(f"unbound variable {e.name}")
        if isinstance(e, A.Binary):
            return self.binary(e, st)
        if isinstance(e, A.Unary):
            x = self.tr(e.operand, st)
            return L.Not(x) if e.op == "!" else L.mk("neg", (x,))
        if isinstance(e, A.FnCall):
            return self.fn_call(e, st)
        if isinstance(e, A.Index):
            base = self.tr(e.base, st)
            idx = self.tr(e.index, st)
            bt = prune(self.type_of(e.base, st))
            if isinstance(bt, ArrayType):
                es = self.elem_sort(e.base, st)
                return L.mk("select", (self.contents(st.heap(es), base), idx))
            es = self.theory.sort_of(bt.elem)
            return self.seq_at(base, idx, es)
        if isinstance(e, A.ArrayLength):
            return self.length(self.tr(e.base, st))
        if isinstance(e, A.Slice):
            bt = prune(self.type_of(e.base, st))
            if not isinstance(bt, ArrayType):
                raise Unsupported("slicing a sequence")
            base = self.tr(e.base, st)
            es = self.elem_sort(e.base, st)
            lo = IntVal(0) if e.lo is None else self.tr(e.lo, st)
            hi = self.length(base) if e.hi is None else self.tr(e.hi, st)
            return self.slice(self.contents(st.heap(es), base), lo, hi, es)
        if isinstance(e, A.MultisetOf):
            s = self.tr(e.arg, st)
            t = prune(self.type_of(e.arg, st))
            return self.multiset_of(s, self.theory.sort_of(t.elem))
        if isinstance(e, A.Old):
            return self.tr(e.expr, st.old_view())
        if isinstance(e, A.Quantifier):
            bvs, inner = self.bind_quantifier(e, st)
            body = self.tr(e.body, inner)
            return L.quant("forall" if e.kind == "forall" else "exists", bvs, body)
        if isinstance(e, A.Destructor):
            base = self.tr(e.base, st)
            return App(f"{base.sort.name}.{e.name}", (base,), self.sort(e, st))
        if isinstance(e, A.IsCtor):
            base = self.tr(e.base, st)
            return App(f"is:{base.sort.name}.{e.ctor}", (base,), BOOL)
        if isinstance(e, A.IfExpr):
            return L.Ite(self.tr(e.cond, st), self.tr(e.then, st),
                         self.tr(e.els, st))
        raise Unsupported(type(e).__name__)

    def bind_quantifier(self, e, st, make=None):
        make = make or self.fresh_bound
        bvs = []
        extra = {}
        for bv in e.vars:
            c = make(bv.name, self.theory.sort_of(self.type_of(bv, st)))
            bvs.append(c)
            extra[bv.name] = c
        return bvs, st.bind(extra)

    def binary(self, e, st):
        op = e.op
        a = self.tr(e.left, st)
        b = self.tr(e.right, st)
        if op in ARITH_OPS:
            return L.mk(ARITH_OPS[op], (a, b))
        if op in CMP_OPS:
            return L.mk(CMP_OPS[op], (a, b))
        if op == "==":
            return L.Eq(a, b)
        if op == "!=":
            return L.Not(L.Eq(a, b))
        if op == "&&":
            return L.And(a, b)
        if op == "||":
            return L.Or(a, b)
        if op == "==>":
            return L.Implies(a, b)
        if op == "<==":
            return L.Implies(b, a)
        if op == "<==>":
            return L.Eq(a, b)
        raise Unsupported(op)

    def fn_call(self, e, st):
        ref = self.tp.refs[id(e)]
        args = [self.tr(a, st) for a in e.args]
        if ref[0] == "ctor":
            s = self.sort(e, st)
            return App(f"{s.name}.{e.name}", args, s)
        callee = ref[1]
        inst = {k: substitute_type(v, st.tinst) for k, v in ref[2].items()}
        inst = {k: _zonked(v) for k, v in inst.items()}
        if not self.tp.is_recursive(callee.name) and callee.body is not None:
            sub = State(dict(zip((p.name for p in callee.params), args)),
                        st.heaps, st.old, (), inst)
            return self.with_decl(callee, lambda: self.tr(callee.body, sub))
        fd = self.function_def(callee, inst)
        heaps = [st.heap(h.sort.args[1].args[1]) for h in fd.heaps]
        if self.defining is not None and callee.name in self.tp.scc_of(
                self.defining.decl.name):
            fuel = self.defining.fuel_var
        else:
            fuel = FUEL_TOP
        return App(fd.name, [fuel] + heaps + args, fd.result)

    def with_decl(self, decl, thunk):
        saved = self.decl
        self.decl = decl
        try:
            return thunk()
        finally:
            self.decl = saved

    def reads_sorts(self, fn: A.Function, inst):
        out = []
        for r in fn.reads:
            t = substitute_type(prune(self.tp.types[id(r)]), inst)
            if isinstance(t, ArrayType):
                s = self.theory.sort_of(t.elem)
                if s not in out:
                    out.append(s)
        return sorted(out, key=repr)

    def function_def(self, fn: A.Function, inst) -> FunDef:
        name = fn.name
        if fn.type_params:
            name += "@" + "_".join(self.theory.mangle(inst[t]) for t in fn.type_params)
        fd = self.theory.functions.get(name)
        if fd is not None:
            return fd
        tpar = _TypeOfRef(self.tp)
        params = [Const(f"{name}.{p.name}", self.theory.sort_of(
            substitute_type(tpar(p.type, fn.type_params), inst))) for p in fn.params]
        heaps = [Const(f"{name}.$H_{_sort_tag(s)}", hold(s).sort)
                 for s in self.reads_sorts(fn, inst)]
        result = self.theory.sort_of(substitute_type(
            tpar(fn.result_type, fn.type_params), inst))
        fd = FunDef(name, fn, params, heaps, Const(f"{name}.$fu", FUEL), result=result)
        self.theory.functions[name] = fd
        st = State(dict(zip((p.name for p in fn.params), params)),
                   {h.sort.args[1].args[1]: h for h in heaps}, None, (), inst)
        sub = Encoder(self.theory, fn, self.fuel)
        sub.defining = fd
        fd.pre = L.conj(sub.tr(r, st) for r in fn.requires)
        fd.body = sub.tr(fn.body, st) if fn.body is not None else None
        return fd

    # -- well-formedness

    def wf(self, e, st, path=()):
        """Emit well-formedness obligations for evaluating ``e``."""
        path = tuple(path)
        if isinstance(e, (A.IntLit, A.BoolLit, A.NullLit, A.Var)):
            return
        if isinstance(e, A.Binary):
            op = e.op
            if op in ("&&", "||", "==>"):
                self.wf(e.left, st, path)
                left = self.tr(e.left, st)
                guard = L.Not(left) if op == "||" else left
                self.wf(e.right, st, path + (guard,))
                return
            if op == "<==":
                self.wf(e.right, st, path)
                self.wf(e.left, st, path + (self.tr(e.right, st),))
                return
            self.wf(e.left, st, path)
            self.wf(e.right, st, path)
            if op in ("/", "%"):
                d = self.tr(e.right, st)
                self.emit("division", L.Not(L.Eq(d, IntVal(0))), st, e.span, path)
            return
        if isinstance(e, A.Unary):
            self.wf(e.operand, st, path)
            return
        if isinstance(e, A.FnCall):
            for a in e.args:
                self.wf(a, st, path)
            ref = self.tp.refs[id(e)]
            if ref[0] != "function":
                return
            callee = ref[1]
            args = [self.tr(a, st) for a in e.args]
            if callee.requires:
                sub = State(dict(zip((p.name for p in callee.params), args)),
                            st.heaps, st.old, (), {k: _zonked(v) for k, v in ref[2].items()})
                pre = self.with_decl(callee, lambda: L.conj(
                    self.tr(r, sub) for r in callee.requires))
                self.emit("function-precondition", pre, st, e.span, path)
            if self.check_termination and callee.name in self.tp.scc_of(self.decl.name):
                self.call_decrease(callee, args, st, e.span, path)
            return
        if isinstance(e, A.Index):
            self.wf(e.base, st, path)
            self.wf(e.index, st, path)
            base = self.tr(e.base, st)
            idx = self.tr(e.index, st)
            bt = prune(self.type_of(e.base, st))
            if isinstance(bt, ArrayType):
                self.null_check(base, st, e.span, path)
                n = self.length(base)
            else:
                n = self.seq_len(base, self.theory.sort_of(bt.elem))
            self.emit("index-bounds", L.And(L.mk("<=", (IntVal(0), idx)),
                                            L.mk("<", (idx, n))), st, e.span, path)
            return
        if isinstance(e, A.ArrayLength):
            self.wf(e.base, st, path)
            self.null_check(self.tr(e.base, st), st, e.span, path)
            return
        if isinstance(e, A.Slice):
            self.wf(e.base, st, path)
            for b in (e.lo, e.hi):
                if b is not None:
                    self.wf(b, st, path)
            base = self.tr(e.base, st)
            self.null_check(base, st, e.span, path)
            if e.lo is not None or e.hi is not None:
                lo = IntVal(0) if e.lo is None else self.tr(e.lo, st)
                hi = self.length(base) if e.hi is None else self.tr(e.hi, st)
                goal = L.And(L.mk("<=", (IntVal(0), lo)), L.mk("<=", (lo, hi)),
                             L.mk("<=", (hi, self.length(base))))
                self.emit("index-bounds", goal, st, e.span, path)
            return
        if isinstance(e, A.MultisetOf):
            self.wf(e.arg, st, path)
            return
        if isinstance(e, A.Old):
            self.wf(e.expr, st.old_view(), path)
            return
        if isinstance(e, A.Quantifier):
            _, inner = self.bind_quantifier(e, st, self.fresh)
            self.wf(e.body, inner, path)
            return
        if isinstance(e, A.Destructor):
            self.wf(e.base, st, path)
            base = self.tr(e.base, st)
            dt, ctor, _ = self.tp.refs[id(e)]
            owners = [c.name for c in dt.ctors
                      if any(f.name == e.name for f in c.fields)]
            goal = L.Or(*(App(f"is:{base.sort.name}.{c}", (base,), BOOL)
                          for c in owners))
            self.emit("function-precondition", goal, st, e.span, path,
                      label="destructor might be applied to the wrong constructor")
            return
        if isinstance(e, A.IsCtor):
            self.wf(e.base, st, path)
            return
        if isinstance(e, A.IfExpr):
            self.wf(e.cond, st, path)
            c = self.tr(e.cond, st)
            self.wf(e.then, st, path + (c,))
            self.wf(e.els, st, path + (L.Not(c),))
            return
        raise Unsupported(type(e).__name__)

    def null_check(self, base, st, span, path):
        self.emit("null-deref", L.Not(L.Eq(base, NULL)), st, span, path)

    def wf_and_tr(self, e, st):
        self.wf(e, st)
        return self.tr(e, st)

    # -- termination

    def metric_terms(self, metric, st):
        return [self.tr(c, st) for c in metric.components]

    def metric_types(self, metric, st):
        return [self.type_of(c, st) for c in metric.components]

    def call_decrease(self, callee, args, st, span, path=()):
        if self.caller_metric is None:
            return
        caller_metric, old_terms = self.caller_metric
        callee_metric = termination.metric_of(callee, self.tp)
        if callee_metric is None or caller_metric.components is None:
            self.emit("decreases-decrease", L.FALSE, st, span, path,
                      label="cannot prove termination; try supplying a decreases clause")
            return
        formals = callee.ins if isinstance(callee, A.Method) else callee.params
        sub = State(dict(zip((p.name for p in formals), args)), st.heaps,
                    st.old, (), st.tinst)
        new_terms = self.with_decl(callee, lambda: self.metric_terms(callee_metric, sub))
        new_types = self.with_decl(callee, lambda: self.metric_types(callee_metric, sub))
        old_types = self.metric_types(caller_metric, st)
        self.decrease(new_terms, old_terms, new_types, old_types, st, span, path)

    def decrease(self, new, old, new_types, old_types, st, span, path=()):
        n = min(len(new), len(old))
        for p in range(n):
            if self.theory.sort_of(new_types[p]) != self.theory.sort_of(old_types[p]):
                self.emit("decreases-decrease", L.FALSE, st, span, path,
                          label="decreases components have different types")
                return
        try:
            goals = termination.decrease_goals(new, old, old_types, self.order)
        except ValueError as exc:
            self.emit("decreases-decrease", L.FALSE, st, span, path, label=str(exc))
            return
        for kind, goal in goals:
            self.emit(kind, goal, st, span, path)

    # -- statements

    def exec_block(self, stmts, st):
        for s in stmts:
            st = self.exec(s, st)
        return st

    def assign_var(self, st, target, value):
        st.env[target.name] = value

    def exec(self, s, st: State) -> State:
        if isinstance(s, A.VarDecl):
            if s.init is not None:
                vals = [self.wf_and_tr(e, st) for e in s.init]
            else:
                vals = [self.fresh(n, self.var_sort(n, st)) for n in s.names]
            st = st.copy()
            for n, v in zip(s.names, vals):
                st.env[n] = v
            return st
        if isinstance(s, A.Assign):
            return self.exec_assign(s, st)
        if isinstance(s, A.ArrayAlloc):
            n = self.wf_and_tr(s.length, st)
            self.emit("index-bounds", L.mk(">=", (n, IntVal(0))), st, s.length.span,
                      label="array size might be negative")
            r = self.fresh(s.target.name, REF)
            st = st.copy()
            others = [v for v in st.env.values() if v.sort == REF]
            st.hyps.append(L.Not(L.Eq(r, NULL)))
            st.hyps.append(L.Eq(self.length(r), n))
            for o in others:
                st.hyps.append(L.Not(L.Eq(r, o)))
            st.env[s.target.name] = r
            return st
        if isinstance(s, A.If):
            c = self.wf_and_tr(s.cond, st)
            then = self.exec_block(s.then, self.branch(st, c))
            els = self.exec_block(s.els or [], self.branch(st, L.Not(c)))
            return self.merge(st, [(c, then), (L.Not(c), els)])
        if isinstance(s, A.While):
            return self.exec_while(s, st)
        if isinstance(s, A.Call):
            return self.exec_call(s, st)
        if isinstance(s, A.Assert):
            phi = self.wf_and_tr(s.expr, st)
            kind = "calc-step" if s.origin == "calc" else "assertion"
            self.emit(kind, phi, st, s.span)
            st = st.copy()
            st.hyps.append(phi)
            return st
        if isinstance(s, A.Assume):
            phi = self.wf_and_tr(s.expr, st)
            if s.origin == "user":
                self.warnings.append(s.span)
            st = st.copy()
            st.hyps.append(phi)
            return st
        if isinstance(s, A.Calc):
            return self.exec_block(desugar_calc(s, self.tp), st)
        if isinstance(s, A.Block):
            # a scoped block: its checks run, its effects do not escape
            self.exec_block(s.stmts, st.copy())
            return st
        if isinstance(s, A.Match):
            return self.exec_match(s, st)
        raise Unsupported(type(s).__name__)

    def branch(self, st, cond):
        b = st.copy()
        b.hyps.append(cond)
        return b

    def merge(self, base: State, branches):
        """Join branch states; ``branches`` is ``[(condition, state)]`` with
        mutually exclusive, exhaustive conditions."""
        out = base.copy()
        k = len(base.hyps)
        guarded = []
        for cond, b in branches:
            extra = b.hyps[k + 1:]
            if extra:
                guarded.append(L.Implies(cond, L.conj(extra)))
        out.hyps.extend(g for g in guarded if g != L.TRUE)

        def join(getter, keys):
            result = {}
            for key in keys:
                vals = [getter(b, key) for _, b in branches]
                if any(v is None for v in vals):
                    continue
                v = vals[-1]
                for (cond, _), w in reversed(list(zip(branches[:-1], vals[:-1]))):
                    v = L.Ite(cond, w, v)
                result[key] = v
            return result

        out.env = join(lambda b, n: b.env.get(n), list(base.env))
        sorts = set()
        for _, b in branches:
            sorts |= set(b.heaps)
        sorts |= set(base.heaps)
        out.heaps = join(lambda b, s: b.heap(s), sorted(sorts, key=repr))
        return out

    def exec_assign(self, s: A.Assign, st):
        pending = []
        for lhs, rhs in zip(s.lhs, s.rhs):
            if isinstance(lhs, A.Index):
                self.wf(lhs.base, st)
                self.wf(lhs.index, st)
                base = self.tr(lhs.base, st)
                idx = self.tr(lhs.index, st)
                self.null_check(base, st, lhs.span, ())
                self.emit("index-bounds", L.And(L.mk("<=", (IntVal(0), idx)),
                                                L.mk("<", (idx, self.length(base)))),
                          st, lhs.span)
                pending.append(("index", lhs, base, idx))
            else:
                pending.append(("var", lhs, None, None))
        vals = [self.wf_and_tr(r, st) for r in s.rhs]
        st = st.copy()
        for (kind, lhs, base, idx), v in zip(pending, vals):
            if kind == "var":
                st.env[lhs.name] = v
            else:
                es = self.elem_sort(lhs.base, st)
                heap = st.heap(es)
                cur = self.contents(heap, base)
                st.heaps[es] = L.mk("store", (heap, base, L.mk("store", (cur, idx, v))))
        return st

    def exec_match(self, s: A.Match, st):
        scrut = self.wf_and_tr(s.scrutinee, st)
        sname = scrut.sort.name
        inst = self.theory.datatypes[sname]
        branches = []
        covered = set()
        for case in s.cases:
            cond = App(f"is:{sname}.{case.ctor}", (scrut,), BOOL)
            covered.add(case.ctor)
            b = self.branch(st, cond)
            fields = next(f for c, f, src in inst.ctors if src.name == case.ctor)
            for binder, (fname, fsort) in zip(case.binders, fields):
                b.env[binder] = App(fname, (scrut,), fsort)
            branches.append((cond, self.exec_block(case.body, b)))
        missing = [c.name for c in inst.decl.ctors if c.name not in covered]
        if missing:
            # an uncovered constructor behaves like an empty case
            cond = L.Or(*(App(f"is:{sname}.{c}", (scrut,), BOOL) for c in missing))
            branches.append((cond, self.branch(st, cond)))
        return self.merge(st, branches)

    # -- loops

    def modified_vars(self, stmts, outer):
        names = set()
        for s in _walk_stmts(stmts):
            if isinstance(s, A.Assign):
                names |= {e.name for e in s.lhs if isinstance(e, A.Var)}
            elif isinstance(s, A.Call):
                names |= {e.name for e in s.targets if isinstance(e, A.Var)}
            elif isinstance(s, A.ArrayAlloc):
                names.add(s.target.name)
        return sorted(n for n in names if n in outer)

    def modified_arrays(self, stmts, st, modified):
        """Per element sort: list of array terms whose contents may change, or
        None when the footprint is not syntactically evident."""
        out: Dict[Sort, Optional[list]] = {}

        def note(expr):
            es = self.elem_sort(expr, st)
            if isinstance(expr, A.Var) and expr.name in st.env and expr.name not in modified:
                lst = out.setdefault(es, [])
                if lst is not None:
                    t = st.env[expr.name]
                    if t not in lst:
                        lst.append(t)
            else:
                out[es] = None

        for s in _walk_stmts(stmts):
            if isinstance(s, A.Assign):
                for e in s.lhs:
                    if isinstance(e, A.Index):
                        note(e.base)
            elif isinstance(s, A.Call):
                callee = self.tp.signatures[s.callee]
                formals = [p.name for p in callee.ins]
                for m in callee.modifies:
                    if isinstance(m, A.Var) and m.name in formals:
                        note(s.args[formals.index(m.name)])
                    else:
                        out[self.elem_sort(m, None)] = None
        return out

    def havoc_heaps(self, st, footprint, tag):
        for es, arrays in sorted(footprint.items(), key=lambda kv: repr(kv[0])):
            heap = st.heap(es)
            if arrays is None:
                st.heaps[es] = self.fresh(f"$H{tag}_{_sort_tag(es)}", heap.sort)
                continue
            for a in arrays:
                c = self.fresh(f"$C{tag}", L.array_sort(INT, es))
                heap = L.mk("store", (heap, a, c))
            st.heaps[es] = heap

    def exec_while(self, w: A.While, st: State):
        for k, inv in enumerate(w.invariants):
            prior = [self.tr(i, st) for i in w.invariants[:k]]
            self.emit("invariant-entry", self.tr(inv, st), st, inv.span, prior)
        modified = self.modified_vars(w.body, st.env)
        footprint = self.modified_arrays(w.body, st, set(modified))
        head = st.copy()
        for n in modified:
            head.env[n] = self.fresh(n, head.env[n].sort)
        self.havoc_heaps(head, footprint, "loop")
        for inv in w.invariants:
            self.wf(inv, head)
            head.hyps.append(self.tr(inv, head))
        self.wf(w.guard, head)
        guard = self.tr(w.guard, head)
        metric = termination.metric_of(w, self.tp)
        if metric is not None:
            for c in metric.components:
                self.wf(c, head)
            d0 = self.metric_terms(metric, head)
        body_st = self.exec_block(w.body, self.branch(head, guard))
        for k, inv in enumerate(w.invariants):
            prior = [self.tr(i, body_st) for i in w.invariants[:k]]
            self.emit("invariant-maintenance", self.tr(inv, body_st), body_st,
                      inv.span, prior)
        if metric is None:
            self.emit("decreases-decrease", L.FALSE, body_st, w.span,
                      label="cannot prove termination; try supplying a decreases clause")
        else:
            d1 = self.metric_terms(metric, body_st)
            types = self.metric_types(metric, head)
            self.decrease(d1, d0, types, types, body_st, metric.span)
        return self.branch(head, L.Not(guard))

    # -- calls

    def exec_call(self, s: A.Call, st: State):
        callee, inst = self.tp.refs[id(s)]
        inst = {k: _zonked(v) for k, v in inst.items()}
        args = [self.wf_and_tr(a, st) for a in s.args]
        formals = {p.name: a for p, a in zip(callee.ins, args)}
        pre_state = State(formals, st.heaps, st.old, (), inst)
        if callee.requires:
            pre = self.with_decl(callee, lambda: L.conj(
                self.tr(r, pre_state) for r in callee.requires))
            self.emit("precondition-at-call", pre, st, s.span)
        if self.check_termination and callee.name in self.tp.scc_of(self.decl.name):
            self.call_decrease(callee, args, st, s.span)
        return self.apply_call(s, callee, formals, inst, st)

    def apply_call(self, s, callee, formals, inst, st):
        post = st.copy()
        footprint = {}
        for m in callee.modifies:
            actual = formals[m.name] if isinstance(m, A.Var) else None
            t = substitute_type(prune(self.tp.types[id(m)]), inst)
            es = self.theory.sort_of(_zonked(t).elem)
            if actual is None:
                footprint[es] = None
            elif footprint.get(es, []) is not None:
                footprint.setdefault(es, []).append(actual)
        self.havoc_heaps(post, footprint, "call")
        results = {}
        for p in callee.outs:
            t = substitute_type(_TypeOfRef(self.tp)(p.type, callee.type_params), inst)
            results[p.name] = self.fresh(p.name, self.theory.sort_of(t))
        ens_state = State({**formals, **results}, post.heaps, st.heaps, (), inst)
        ens = self.with_decl(callee, lambda: [self.tr(e, ens_state)
                                              for e in callee.ensures])
        post.hyps.extend(ens)
        for t, p in zip(s.targets, callee.outs):
            post.env[t.name] = results[p.name]
        return post


def _zonked(t):
    from minivc.resolve import zonk
    return zonk(t)


def _walk_stmts(stmts):
    for s in stmts:
        yield s
        if isinstance(s, A.If):
            yield from _walk_stmts(s.then)
            yield from _walk_stmts(s.els or [])
        elif isinstance(s, A.While):
            yield from _walk_stmts(s.body)
        elif isinstance(s, A.Match):
            for c in s.cases:
                yield from _walk_stmts(c.body)
        elif isinstance(s, A.Block):
            yield from _walk_stmts(s.stmts)
        elif isinstance(s, A.Calc):
            for h in s.hints:
                yield from _walk_stmts(h)


# ---------------------------------------------------------------- calc

CALC_CLASSES = [
    {"=="},
    {"==", "<", "<="},
    {"==", ">", ">="},
    {"==", "==>", "<==>"},
    {"==", "<==", "<==>"},
    {"==", "!="},
]


def calc_relation(ops, op_spans=None):
    """Composed relation of a chain of calc steps."""
    ops = list(ops)
    spans = list(op_spans or [None] * len(ops))
    if not ops:
        return None
    used = set()
    for i, op in enumerate(ops):
        used.add(op)
        if not any(used <= c for c in CALC_CLASSES) or (
                op == "!=" and ops.count("!=") > 1):
            raise DiagnosticError([error(spans[i], "calc-step",
                                         f"'{op}' cannot be combined with the "
                                         f"other steps of this calculation")])
    for strong in ("!=", "<", ">", "==>", "<=="):
        if strong in used:
            return strong
    for weak in ("<=", ">=", "<==>"):
        if weak in used:
            return weak
    return "=="


def _rel(op, a, b, span):
    a, b = copy.deepcopy(a), copy.deepcopy(b)
    return A.Binary(op, a, b, span=span)


def desugar_calc(stmt: A.Calc, tp: TypedProgram = None):
    """Rewrite a calc statement into scoped step blocks plus one assumption."""
    lines = stmt.lines
    if len(lines) <= 1:
        return [A.Assume(A.BoolLit(True, span=stmt.span), origin="calc", span=stmt.span)]
    spans = stmt.op_spans or [stmt.span] * len(stmt.ops)
    out = []
    for i, op in enumerate(stmt.ops):
        rel = _rel(op, lines[i], lines[i + 1], spans[i])
        if tp is not None:
            _copy_types(tp, lines[i], rel.left)
            _copy_types(tp, lines[i + 1], rel.right)
            tp.types[id(rel)] = BoolType()
        step = list(stmt.hints[i]) + [A.Assert(rel, origin="calc", span=spans[i])]
        out.append(A.Block(step, span=spans[i]))
    composed = calc_relation(stmt.ops, spans)
    rel = _rel(composed, lines[0], lines[-1], stmt.span)
    if tp is not None:
        _copy_types(tp, lines[0], rel.left)
        _copy_types(tp, lines[-1], rel.right)
        tp.types[id(rel)] = BoolType()
    out.append(A.Assume(rel, origin="calc", span=stmt.span))
    return out


def _copy_types(tp, src, dst):
    """Carry resolution info over to a deep copy of an expression."""
    stack = [(src, dst)]
    while stack:
        a, b = stack.pop()
        if id(a) in tp.types:
            tp.types[id(b)] = tp.types[id(a)]
        if id(a) in tp.refs:
            tp.refs[id(b)] = tp.refs[id(a)]
        tp._keep = getattr(tp, "_keep", [])
        tp._keep.append(b)
        for fa, fb in zip(_fields(a), _fields(b)):
            if isinstance(fa, list):
                stack.extend(zip(fa, fb))
            else:
                stack.append((fa, fb))


def _fields(node):
    import dataclasses
    if not dataclasses.is_dataclass(node):
        return []
    out = []
    for f in dataclasses.fields(node):
        if f.name == "span":
            continue
        v = getattr(node, f.name)
        if dataclasses.is_dataclass(v) and not isinstance(v, A.SourceSpan):
            out.append(v)
        elif isinstance(v, list) and v and dataclasses.is_dataclass(v[0]):
            out.append(v)
    return out


# ---------------------------------------------------------------- entry points

def _entry_state(enc, decl, params):
    env = {}
    for p in params:
        env[p.name] = Const(p.name, enc.var_sort(p.name))
    return State(env)


def vc_method(decl: A.Method, tp: TypedProgram, fuel: int = 2, theory=None):
    """Obligations for a method or lemma (contract well-formedness, body)."""
    theory = theory or Theory(tp)
    enc = Encoder(theory, decl, fuel)
    st = _entry_state(enc, decl, decl.ins)
    for r in decl.requires:
        enc.wf(r, st)
        st.hyps.append(enc.tr(r, st))
    entry = st.copy()
    for e in decl.modifies:
        enc.wf(e, st)
    # ensures are well-formed in any post-state
    post = st.copy()
    for p in decl.outs:
        post.env[p.name] = enc.fresh(p.name, enc.var_sort(p.name))
    fp = {}
    for m in decl.modifies:
        es = enc.elem_sort(m, None)
        if isinstance(m, A.Var) and m.name in post.env:
            if fp.get(es, []) is not None:
                fp.setdefault(es, []).append(post.env[m.name])
        else:
            fp[es] = None
    enc.havoc_heaps(post, fp, "post")
    for e in decl.ensures:
        enc.wf(e, post)
        post.hyps.append(enc.tr(e, post))
    if decl.body is None:
        return enc.obs
    if tp.is_recursive(decl.name):
        metric = termination.metric_of(decl, tp)
        if metric is not None:
            enc.caller_metric = (metric, enc.metric_terms(metric, entry))
        else:
            enc.caller_metric = (termination.Metric(None, "guessed", decl.span), [])
    enc.check_termination = True
    for p in decl.outs:
        st.env[p.name] = Const(p.name, enc.var_sort(p.name))
    final = enc.exec_block(decl.body, st)
    enc.check_termination = False
    for k, e in enumerate(decl.ensures):
        prior = [enc.tr(x, final) for x in decl.ensures[:k]]
        enc.emit("postcondition", enc.tr(e, final), final, e.span, prior)
    enc.method_warnings = enc.warnings
    return enc.obs


def vc_function(decl: A.Function, tp: TypedProgram, fuel: int = 2, theory=None):
    """Obligations for a function: contract and body well-formedness,
    including termination of recursive calls."""
    theory = theory or Theory(tp)
    enc = Encoder(theory, decl, fuel)
    st = _entry_state(enc, decl, decl.params)
    for r in decl.requires:
        enc.wf(r, st)
        st.hyps.append(enc.tr(r, st))
    for r in decl.reads:
        enc.wf(r, st)
    if decl.body is None:
        return enc.obs
    if tp.is_recursive(decl.name):
        metric = termination.metric_of(decl, tp)
        if metric is not None:
            enc.caller_metric = (metric, enc.metric_terms(metric, st))
        else:
            enc.caller_metric = (termination.Metric(None, "guessed", decl.span), [])
    enc.check_termination = True
    enc.wf(decl.body, st)
    return enc.obs


def vc_declaration(decl, tp, fuel=2, theory=None):
    if isinstance(decl, A.Method):
        obs = vc_method(decl, tp, fuel, theory)
    elif isinstance(decl, A.Function):
        obs = vc_function(decl, tp, fuel, theory)
    else:
        return []
    return [finalize(ob) for ob in obs]


def encode_call(stmt: A.Call, callee: A.Method, tp: TypedProgram, caller,
                state: State = None, theory=None):
    """Encode one call in ``state``: returns ``(obligations, post state)``."""
    enc = Encoder(theory or Theory(tp), caller)
    st = state or _named_state(enc, tp, caller)
    post = enc.exec_call(stmt, st)
    return enc.obs, post


def encode_old(e, tp, decl, state: State = None, theory=None):
    """``old(e)``: ``e`` read in the pre-state heaps."""
    enc = Encoder(theory or Theory(tp), decl)
    st = state or _named_state(enc, tp, decl)
    return enc.tr(A.Old(e, span=e.span) if not isinstance(e, A.Old) else e, st)


def encode_expr(e, tp, decl, state: State = None, theory=None):
    """Translate ``e`` with every program variable of ``decl`` as a constant
    of the same name."""
    enc = Encoder(theory or Theory(tp), decl)
    st = state or _named_state(enc, tp, decl)
    return enc.tr(e, st)


def _named_state(enc, tp, decl):
    """All program variables as same-named constants; ``old`` reads a
    distinct pre-state heap ``$Old_<sort>``."""
    names = {n: info for n, info in tp.variables[decl.name].items()
             if info.kind != "bound"}
    old = {}
    for info in names.values():
        t = prune(info.type)
        if isinstance(t, ArrayType):
            es = enc.theory.sort_of(t.elem)
            old[es] = Const(f"$Old_{_sort_tag(es)}", hold(es).sort)
    return State({n: Const(n, enc.theory.sort_of(i.type)) for n, i in names.items()},
                 old=old)


def wp_stmt(s, post: L.Term, tp: TypedProgram, decl, theory=None):
    """Weakest precondition of ``s`` for ``post`` (a formula over constants
    named after program variables).  Returns ``(formula, side obligations)``."""
    enc = Encoder(theory or Theory(tp), decl)
    st = _named_state(enc, tp, decl)
    final = enc.exec(s, st)
    mapping = {c: final.env[n] for n, c in st.env.items() if n in final.env}
    for es, h in final.heaps.items():
        mapping[hold(es)] = h
    body = L.Implies(L.conj(final.hyps), L.substitute(post, mapping))
    sides = [ob.formula() for ob in enc.obs]
    return L.conj(sides + [body]), enc.obs


# ---------------------------------------------------------------- literals

def _literal_eqs(terms):
    """Candidate values ``(const, literal)``: equalities with literals, and
    the boundary values of comparisons with integer literals."""
    found = []

    def add(a, b):
        if not a.name.startswith("$") and "#" not in a.name and (a, b) not in found:
            found.append((a, b))
    for t in terms:
        for x in L.subterms(t):
            if not (isinstance(x, App) and len(x.args) == 2):
                continue
            a, b = x.args
            if isinstance(b, Const) and isinstance(a, (IntVal, L.BoolVal)):
                a, b = b, a
            if not (isinstance(a, Const) and isinstance(b, (IntVal, L.BoolVal))):
                continue
            if x.op == "=":
                add(a, b)
            elif x.op in L.COMPARE:
                for d in (0, 1, -1):
                    add(a, IntVal(b.value + d))
    return found


def finalize(ob: Obligation) -> Obligation:
    """Literal reasoning the solver cannot do with bounded fuel: propagate
    hypotheses ``x == literal`` and add ground values of recursive functions
    applied to literals (computed by the interpreter)."""
    theory = ob.theory
    if theory is None:
        return ob
    top = {}
    for h in ob.hypotheses:
        for c in L.conjuncts(h):
            if isinstance(c, App) and c.op == "=":
                a, b = c.args
                if isinstance(b, Const) and isinstance(a, (IntVal, L.BoolVal)):
                    a, b = b, a
                if isinstance(a, Const) and isinstance(b, (IntVal, L.BoolVal)) \
                        and a not in top:
                    top[a] = b
    goal, hyps = ob.goal, list(ob.hypotheses)
    if top:
        goal = L.substitute(goal, top)
        hyps = [L.substitute(h, top) for h in hyps]
        hyps = [h for h in hyps if h != L.TRUE]
        hyps = list(L.Eq(c, v) for c, v in top.items()) + hyps
    everything = [goal] + hyps
    candidates = _literal_eqs(everything)[:40]
    extra = []
    seen = set()
    for t in everything:
        for x in L.subterms(t):
            if not (isinstance(x, App) and x.op in theory.functions):
                continue
            fd = theory.functions[x.op]
            if fd.heaps or L.free_consts(x) & {c for c in fd.params}:
                continue
            if any(isinstance(y, L.Quant) for y in L.subterms(x)):
                continue
            options = [(None, x)]
            fc = L.free_consts(x)
            for c, v in candidates:
                if c in fc:
                    options.append(((c, v), L.substitute(x, {c: v})))
            for cond, inst in options:
                args = inst.args[1:]
                if not all(isinstance(a, (IntVal, L.BoolVal)) for a in args):
                    continue
                if inst.args[0] != FUEL_TOP:
                    continue
                key = (cond, x)
                if key in seen:
                    continue
                seen.add(key)
                val = theory.evaluate(x.op, tuple(a.value for a in args))
                if val is None:
                    continue
                fact = L.Eq(x, val)
                extra.append(fact if cond is None else L.Implies(L.Eq(*cond), fact))
    if not top and not extra:
        return ob
    out = copy.copy(ob)
    out.goal = goal
    out.hypotheses = hyps + extra
    return out
