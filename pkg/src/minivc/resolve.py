"""Name resolution, type checking, ghost checking and frame checking."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set

from minivc.diagnostics import Diagnostic, DiagnosticError, error
from minivc.syntax import ast as A


# ---------------------------------------------------------------- types

class Type:
    pass


@dataclass(frozen=True)
class IntType(Type):
    def __str__(self):
        return "int"


@dataclass(frozen=True)
class BoolType(Type):
    def __str__(self):
        return "bool"


@dataclass(frozen=True)
class NullType(Type):
    def __str__(self):
        return "null"


@dataclass(frozen=True)
class TypeVar(Type):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class ArrayType(Type):
    elem: Type

    def __str__(self):
        return f"array<{self.elem}>"


@dataclass(frozen=True)
class SeqType(Type):
    elem: Type

    def __str__(self):
        return f"seq<{self.elem}>"


@dataclass(frozen=True)
class MultisetType(Type):
    elem: Type

    def __str__(self):
        return f"multiset<{self.elem}>"


@dataclass(frozen=True)
class DatatypeType(Type):
    name: str
    args: tuple = ()

    def __str__(self):
        if self.args:
            return f"{self.name}<{', '.join(map(str, self.args))}>"
        return self.name


@dataclass(eq=False)
class MetaType(Type):
    """Placeholder solved by unification (generic instantiation, untyped
    bound variables)."""
    id: int
    ref: Optional[Type] = None

    def __str__(self):
        return f"?{self.id}"


INT = IntType()
BOOL = BoolType()
NULL = NullType()


def prune(t):
    while isinstance(t, MetaType) and t.ref is not None:
        t = t.ref
    return t


def zonk(t, default=INT):
    t = prune(t)
    if isinstance(t, MetaType):
        t.ref = default
        return default
    if isinstance(t, ArrayType):
        return ArrayType(zonk(t.elem, default))
    if isinstance(t, SeqType):
        return SeqType(zonk(t.elem, default))
    if isinstance(t, MultisetType):
        return MultisetType(zonk(t.elem, default))
    if isinstance(t, DatatypeType):
        return DatatypeType(t.name, tuple(zonk(a, default) for a in t.args))
    return t


def substitute_type(t, mapping):
    t = prune(t)
    if isinstance(t, TypeVar):
        return mapping.get(t.name, t)
    if isinstance(t, ArrayType):
        return ArrayType(substitute_type(t.elem, mapping))
    if isinstance(t, SeqType):
        return SeqType(substitute_type(t.elem, mapping))
    if isinstance(t, MultisetType):
        return MultisetType(substitute_type(t.elem, mapping))
    if isinstance(t, DatatypeType):
        return DatatypeType(t.name, tuple(substitute_type(a, mapping)
                                          for a in t.args))
    return t


# ---------------------------------------------------------------- results

@dataclass
class VarInfo:
    name: str
    type: Type
    ghost: bool
    kind: str            # "in", "out", "local", "bound"


@dataclass
class TypedProgram:
    program: A.Program
    types: Dict[int, Type]
    signatures: Dict[str, object]
    call_graph: Dict[str, Set[str]]
    variables: Dict[str, Dict[str, VarInfo]]
    refs: Dict[int, object] = field(default_factory=dict)
    ctor_owner: Dict[str, A.Datatype] = field(default_factory=dict)

    def type_of(self, e) -> Type:
        return self.types[id(e)]

    def decl(self, name):
        return self.signatures.get(name)

    def var(self, decl_name, name) -> VarInfo:
        return self.variables[decl_name][name]

    def sccs(self):
        return strongly_connected(self.call_graph)

    def scc_of(self, name):
        for comp in self.sccs():
            if name in comp:
                return comp
        return {name}

    def is_recursive(self, name):
        comp = self.scc_of(name)
        return len(comp) > 1 or name in self.call_graph.get(name, ())

    def ctor(self, name):
        dt = self.ctor_owner.get(name)
        if dt is None:
            return None, None
        for c in dt.ctors:
            if c.name == name:
                return dt, c
        return None, None


def strongly_connected(graph):
    """Tarjan's algorithm; components returned in a deterministic order."""
    index, low, on_stack, stack, out = {}, {}, set(), [], []
    counter = itertools.count()

    def visit(v):
        index[v] = low[v] = next(counter)
        stack.append(v)
        on_stack.add(v)
        for w in sorted(graph.get(v, ())):
            if w not in graph:
                continue
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = set()
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.add(w)
                if w == v:
                    break
            out.append(frozenset(comp))

    for v in sorted(graph):
        if v not in index:
            visit(v)
    return out


class _Fail(Exception):
    pass


# ---------------------------------------------------------------- resolver

ARITH = ("+", "-", "*", "/", "%")
ORDER = ("<", "<=", ">", ">=")
LOGIC = ("&&", "||", "==>", "<==", "<==>")


class Resolver:
    def __init__(self, program: A.Program):
        self.program = program
        self.diags: List[Diagnostic] = []
        self.types: Dict[int, Type] = {}
        self.refs: Dict[int, object] = {}
        self.signatures = {}
        self.ctor_owner = {}
        self.call_graph: Dict[str, Set[str]] = {}
        self.variables: Dict[str, Dict[str, VarInfo]] = {}
        self.meta_ids = itertools.count()
        for d in program.decls:
            self.signatures.setdefault(d.name, d)
            if isinstance(d, A.Datatype):
                for c in d.ctors:
                    if c.name in self.ctor_owner or c.name in self.signatures:
                        self.err(c.span, "duplicate",
                                 f"duplicate name '{c.name}'")
                    self.ctor_owner[c.name] = d

    # ---------------------------------------------------------- utilities

    def err(self, span, kind, message):
        self.diags.append(error(span, kind, message))

    def fresh_meta(self):
        return MetaType(next(self.meta_ids))

    def unify(self, a, b):
        a, b = prune(a), prune(b)
        if a is b:
            return True
        if isinstance(a, MetaType):
            if self._occurs(a, b):
                return False
            a.ref = b
            return True
        if isinstance(b, MetaType):
            return self.unify(b, a)
        if isinstance(a, NullType) and isinstance(b, (ArrayType, NullType)):
            return True
        if isinstance(b, NullType) and isinstance(a, ArrayType):
            return True
        if type(a) is not type(b):
            return False
        if isinstance(a, (ArrayType, SeqType, MultisetType)):
            return self.unify(a.elem, b.elem)
        if isinstance(a, DatatypeType):
            return (a.name == b.name and len(a.args) == len(b.args)
                    and all(self.unify(x, y) for x, y in zip(a.args, b.args)))
        return a == b

    def _occurs(self, m, t):
        t = prune(t)
        if t is m:
            return True
        if isinstance(t, (ArrayType, SeqType, MultisetType)):
            return self._occurs(m, t.elem)
        if isinstance(t, DatatypeType):
            return any(self._occurs(m, x) for x in t.args)
        return False

    def expect_type(self, e, actual, wanted, what=None):
        if not self.unify(actual, wanted):
            what = what or "expression"
            self.err(e.span, "type-mismatch",
                     f"{what} has type {zonk_copy(actual)} but "
                     f"{zonk_copy(wanted)} was expected")

    def type_of_ref(self, t: A.TypeRef, tparams):
        n = t.name
        args = [self.type_of_ref(a, tparams) for a in t.args]

        def arity(k):
            if len(args) != k:
                self.err(t.span, "type-mismatch",
                         f"type '{n}' expects {k} type argument(s)")
                raise _Fail
        if n in ("int", "nat"):
            arity(0)
            return INT
        if n == "bool":
            arity(0)
            return BOOL
        if n in ("array", "seq", "multiset"):
            arity(1)
            if n == "array":
                if isinstance(args[0], ArrayType):
                    self.err(t.span, "type-mismatch",
                             "multi-dimensional arrays are not supported")
                return ArrayType(args[0])
            return SeqType(args[0]) if n == "seq" else MultisetType(args[0])
        if n in tparams:
            arity(0)
            return TypeVar(n)
        d = self.signatures.get(n)
        if isinstance(d, A.Datatype):
            arity(len(d.type_params))
            return DatatypeType(n, tuple(args))
        self.err(t.span, "unresolved", f"unknown type '{n}'")
        raise _Fail

    # ---------------------------------------------------------- driver

    def run(self):
        for d in self.program.decls:
            self.call_graph[d.name] = set()
            self.variables[d.name] = {}
        for d in self.program.decls:
            try:
                if isinstance(d, A.Datatype):
                    self.datatype(d)
                elif isinstance(d, A.Function):
                    self.function(d)
                else:
                    self.method(d)
            except _Fail:
                pass
        for k in list(self.types):
            self.types[k] = zonk(self.types[k])
        for vs in self.variables.values():
            for v in vs.values():
                v.type = zonk(v.type)
        self.call_graph = {k: v for k, v in self.call_graph.items()
                           if not isinstance(self.signatures.get(k), A.Datatype)}
        return TypedProgram(self.program, self.types, self.signatures,
                            self.call_graph, self.variables, self.refs,
                            self.ctor_owner)

    def datatype(self, d: A.Datatype):
        for c in d.ctors:
            for f in c.fields:
                self.type_of_ref(f.type, d.type_params)

    def declare(self, scopes, decl_name, name, ty, ghost, kind, span):
        for s in scopes:
            if name in s:
                self.err(span, "duplicate",
                         f"'{name}' is already declared in this scope")
                raise _Fail
        known = self.variables[decl_name].get(name)
        if known is not None and kind != "bound":
            if zonk_copy(known.type) != zonk_copy(ty) or known.ghost != ghost:
                self.err(span, "duplicate",
                         f"conflicting declarations of '{name}'")
                raise _Fail
        info = VarInfo(name, ty, ghost, kind)
        scopes[-1][name] = info
        if kind != "bound" or name not in self.variables[decl_name]:
            self.variables[decl_name][name] = info
        return info

    def function(self, d: A.Function):
        self.current = d
        tps = d.type_params
        scopes = [{}]
        for p in d.params:
            self.declare(scopes, d.name, p.name, self.type_of_ref(p.type, tps),
                         p.ghost or not d.is_compiled, "in", p.span)
        result = self.type_of_ref(d.result_type, tps)
        if d.is_predicate and result != BOOL:
            self.err(d.span, "type-mismatch", "a predicate returns bool")
        ctx = Ctx(d, scopes, tps, two_state=False, ghost=not d.is_compiled)
        for r in d.requires:
            self.expect_type(r, self.expr(r, ctx), BOOL, "precondition")
        for r in d.reads:
            t = prune(self.expr(r, ctx))
            if not isinstance(t, ArrayType):
                self.err(r.span, "type-mismatch",
                         "a reads clause lists arrays")
        for e in d.decreases or []:
            self.expr(e, ctx)
        if d.body is not None:
            self.expect_type(d.body, self.expr(d.body, ctx), result,
                             "function body")

    def method(self, d: A.Method):
        self.current = d
        tps = d.type_params
        scopes = [{}]
        ghostly = d.ghostly
        for p in d.ins:
            self.declare(scopes, d.name, p.name, self.type_of_ref(p.type, tps),
                         p.ghost or ghostly, "in", p.span)
        pre = Ctx(d, scopes, tps, two_state=False, ghost=True)
        for r in d.requires:
            self.expect_type(r, self.expr(r, pre), BOOL, "precondition")
        for e in d.modifies:
            t = prune(self.expr(e, pre))
            if not isinstance(t, ArrayType):
                self.err(e.span, "type-mismatch",
                         "a modifies clause lists arrays")
        for e in d.decreases or []:
            self.expr(e, pre)
        scopes.append({})
        for p in d.outs:
            self.declare(scopes, d.name, p.name, self.type_of_ref(p.type, tps),
                         p.ghost or ghostly, "out", p.span)
        post = Ctx(d, scopes, tps, two_state=True, ghost=True)
        for e in d.ensures:
            self.expect_type(e, self.expr(e, post), BOOL, "postcondition")
        if d.body is not None:
            body_ctx = Ctx(d, scopes + [{}], tps, two_state=True, ghost=ghostly)
            self.stmts(d.body, body_ctx)

    # ---------------------------------------------------------- statements

    def stmts(self, stmts, ctx):
        for s in stmts:
            try:
                self.stmt(s, ctx)
            except _Fail:
                pass

    def assignable(self, e, ctx):
        if isinstance(e, A.Var):
            info = ctx.lookup(e.name)
            if info is None:
                self.err(e.span, "unresolved", f"unknown variable '{e.name}'")
                raise _Fail
            if info.kind in ("in", "bound"):
                self.err(e.span, "type-mismatch",
                         f"cannot assign to in-parameter '{e.name}'")
            self.types[id(e)] = info.type
            self.refs[id(e)] = info
            return info.type
        if isinstance(e, A.Index):
            bt = prune(self.expr(e.base, ctx))
            if not isinstance(bt, ArrayType):
                self.err(e.span, "type-mismatch", "only array elements can "
                         "be assigned")
                raise _Fail
            self.expect_type(e.index, self.expr(e.index, ctx), INT, "index")
            self.types[id(e)] = bt.elem
            return bt.elem
        self.err(e.span, "type-mismatch", "invalid assignment target")
        raise _Fail

    def stmt(self, s, ctx: "Ctx"):
        d = ctx.decl
        if isinstance(s, A.VarDecl):
            inits = s.init
            if inits is not None and len(inits) != len(s.names):
                self.err(s.span, "arity-mismatch",
                         f"{len(s.names)} variables but {len(inits)} values")
                raise _Fail
            tys = []
            for i, (n, tr) in enumerate(zip(s.names, s.types)):
                ty = self.type_of_ref(tr, ctx.tparams) if tr else self.fresh_meta()
                if inits is not None:
                    self.expect_type(inits[i], self.expr(inits[i], ctx), ty,
                                     f"initializer of '{n}'")
                tys.append(ty)
            for n, ty in zip(s.names, tys):
                self.declare(ctx.scopes, d.name, n, ty, s.ghost or ctx.ghost,
                             "local", s.span)
        elif isinstance(s, A.Assign):
            if len(s.lhs) != len(s.rhs):
                self.err(s.span, "arity-mismatch",
                         f"{len(s.lhs)} targets but {len(s.rhs)} values")
                raise _Fail
            for lhs, rhs in zip(s.lhs, s.rhs):
                lt = self.assignable(lhs, ctx)
                self.expect_type(rhs, self.expr(rhs, ctx), lt)
        elif isinstance(s, A.ArrayAlloc):
            elem = self.type_of_ref(s.elem_type, ctx.tparams)
            self.expect_type(s.length, self.expr(s.length, ctx), INT,
                             "array length")
            if s.declare:
                info = self.declare(ctx.scopes, d.name, s.target.name,
                                    ArrayType(elem), s.ghost or ctx.ghost,
                                    "local", s.span)
                self.types[id(s.target)] = info.type
                self.refs[id(s.target)] = info
            else:
                t = self.assignable(s.target, ctx)
                self.expect_type(s.target, t, ArrayType(elem), "target")
        elif isinstance(s, A.If):
            self.expect_type(s.cond, self.expr(s.cond, ctx), BOOL, "condition")
            self.stmts(s.then, ctx.nested())
            if s.els is not None:
                self.stmts(s.els, ctx.nested())
        elif isinstance(s, A.While):
            self.expect_type(s.guard, self.expr(s.guard, ctx), BOOL,
                             "loop guard")
            for inv in s.invariants:
                self.expect_type(inv, self.expr(inv, ctx), BOOL, "invariant")
            for e in s.decreases or []:
                self.expr(e, ctx)
            self.stmts(s.body, ctx.nested())
        elif isinstance(s, A.Call):
            self.call_stmt(s, ctx)
        elif isinstance(s, (A.Assert, A.Assume)):
            self.expect_type(s.expr, self.expr(s.expr, ctx), BOOL, "assertion")
        elif isinstance(s, A.Calc):
            self.calc(s, ctx)
        elif isinstance(s, A.Match):
            self.match(s, ctx)
        elif isinstance(s, A.Block):
            self.stmts(s.stmts, ctx.nested())
        else:
            raise TypeError(s)

    def call_stmt(self, s: A.Call, ctx):
        d = ctx.decl
        callee = self.signatures.get(s.callee)
        if not isinstance(callee, A.Method):
            kind = "unresolved" if callee is None else "type-mismatch"
            self.err(s.span, kind, f"'{s.callee}' is not a method")
            raise _Fail
        self.call_graph[d.name].add(callee.name)
        if len(s.args) != len(callee.ins):
            self.err(s.span, "arity-mismatch",
                     f"'{callee.name}' expects {len(callee.ins)} argument(s), "
                     f"got {len(s.args)}")
            raise _Fail
        if len(s.targets) != len(callee.outs):
            self.err(s.span, "arity-mismatch",
                     f"'{callee.name}' returns {len(callee.outs)} value(s), "
                     f"{len(s.targets)} target(s) given")
            raise _Fail
        inst = {tp: self.fresh_meta() for tp in callee.type_params}
        for a, p in zip(s.args, callee.ins):
            pt = substitute_type(self.type_of_ref(p.type, callee.type_params),
                                 inst)
            self.expect_type(a, self.expr(a, ctx), pt, f"argument '{p.name}'")
        for t, p in zip(s.targets, callee.outs):
            pt = substitute_type(self.type_of_ref(p.type, callee.type_params),
                                 inst)
            if s.declare:
                info = self.declare(ctx.scopes, d.name, t.name, pt,
                                    s.ghost or ctx.ghost, "local", s.span)
                self.types[id(t)] = info.type
                self.refs[id(t)] = info
            else:
                self.expect_type(t, self.assignable(t, ctx), pt, "call target")
        self.refs[id(s)] = (callee, inst)

    def calc(self, s: A.Calc, ctx):
        if len(s.ops) != len(s.lines) - 1 or len(s.hints) != len(s.ops):
            self.err(s.span, "syntax", "malformed calc statement")
            raise _Fail
        line_t = None
        for line in s.lines:
            t = self.expr(line, ctx)
            if line_t is None:
                line_t = t
            else:
                self.expect_type(line, t, line_t, "calc line")
        for op, sp in zip(s.ops, s.op_spans or [s.span] * len(s.ops)):
            if op in ORDER and not self.unify(line_t, INT):
                self.err(sp, "type-mismatch", f"'{op}' needs int lines")
            if op in ("==>", "<==", "<==>") and not self.unify(line_t, BOOL):
                self.err(sp, "type-mismatch", f"'{op}' needs bool lines")
        for h in s.hints:
            self.stmts(h, ctx.nested(ghost=True))

    def match(self, s: A.Match, ctx):
        t = prune(self.expr(s.scrutinee, ctx))
        if not isinstance(t, DatatypeType):
            self.err(s.scrutinee.span, "type-mismatch",
                     "match needs a datatype value")
            raise _Fail
        dt = self.signatures[t.name]
        inst = dict(zip(dt.type_params, t.args))
        for case in s.cases:
            owner = self.ctor_owner.get(case.ctor)
            if owner is not dt:
                self.err(case.span, "unresolved",
                         f"'{case.ctor}' is not a constructor of {dt.name}")
                continue
            ctor = next(c for c in dt.ctors if c.name == case.ctor)
            if len(ctor.fields) != len(case.binders):
                self.err(case.span, "arity-mismatch",
                         f"'{ctor.name}' has {len(ctor.fields)} field(s)")
                continue
            inner = ctx.nested()
            for b, f in zip(case.binders, ctor.fields):
                ft = substitute_type(self.type_of_ref(f.type, dt.type_params),
                                     inst)
                self.declare(inner.scopes, ctx.decl.name, b, ft, ctx.ghost,
                             "local", case.span)
            self.stmts(case.body, inner)

    # ---------------------------------------------------------- expressions

    def expr(self, e, ctx) -> Type:
        t = self._expr(e, ctx)
        self.types[id(e)] = t
        return t

    def _expr(self, e, ctx) -> Type:
        if isinstance(e, A.IntLit):
            return INT
        if isinstance(e, A.BoolLit):
            return BOOL
        if isinstance(e, A.NullLit):
            return NULL
        if isinstance(e, A.Var):
            info = ctx.lookup(e.name)
            if info is not None:
                self.refs[id(e)] = info
                return info.type
            dt = self.ctor_owner.get(e.name)
            if dt is not None:
                ctor = next(c for c in dt.ctors if c.name == e.name)
                if ctor.fields:
                    self.err(e.span, "arity-mismatch",
                             f"constructor '{e.name}' needs arguments")
                self.refs[id(e)] = ("ctor", dt, ctor)
                return DatatypeType(dt.name, tuple(self.fresh_meta()
                                                   for _ in dt.type_params))
            self.err(e.span, "unresolved", f"unknown identifier '{e.name}'")
            raise _Fail
        if isinstance(e, A.Binary):
            return self.binary(e, ctx)
        if isinstance(e, A.Unary):
            t = self.expr(e.operand, ctx)
            want = BOOL if e.op == "!" else INT
            self.expect_type(e.operand, t, want, f"operand of '{e.op}'")
            return want
        if isinstance(e, A.FnCall):
            return self.fn_call(e, ctx)
        if isinstance(e, A.Index):
            bt = prune(self.expr(e.base, ctx))
            self.expect_type(e.index, self.expr(e.index, ctx), INT, "index")
            if isinstance(bt, (ArrayType, SeqType)):
                return bt.elem
            self.err(e.span, "type-mismatch", f"cannot index a value of type {bt}")
            raise _Fail
        if isinstance(e, A.ArrayLength):
            bt = prune(self.expr(e.base, ctx))
            if not isinstance(bt, ArrayType):
                self.err(e.span, "type-mismatch", "'.Length' needs an array")
            return INT
        if isinstance(e, A.Slice):
            bt = prune(self.expr(e.base, ctx))
            for b in (e.lo, e.hi):
                if b is not None:
                    self.expect_type(b, self.expr(b, ctx), INT, "slice bound")
            if isinstance(bt, (ArrayType, SeqType)):
                return SeqType(bt.elem)
            self.err(e.span, "type-mismatch", f"cannot slice a value of type {bt}")
            raise _Fail
        if isinstance(e, A.MultisetOf):
            t = prune(self.expr(e.arg, ctx))
            if isinstance(t, MetaType):
                elem = self.fresh_meta()
                self.unify(t, SeqType(elem))
                return MultisetType(elem)
            if not isinstance(t, SeqType):
                self.err(e.span, "type-mismatch", "multiset() needs a sequence")
                raise _Fail
            return MultisetType(t.elem)
        if isinstance(e, A.Old):
            if not ctx.two_state:
                self.err(e.span, "old-context",
                         "old() is not allowed in a single-state context")
            return self.expr(e.expr, ctx)
        if isinstance(e, A.Quantifier):
            inner = ctx.nested()
            for bv in e.vars:
                ty = (self.type_of_ref(bv.type, ctx.tparams) if bv.type
                      else self.fresh_meta())
                info = self.declare(inner.scopes, ctx.decl.name, bv.name, ty,
                                    True, "bound", bv.span)
                self.types[id(bv)] = ty
                self.refs[id(bv)] = info
            self.expect_type(e.body, self.expr(e.body, inner), BOOL,
                             "quantifier body")
            return BOOL
        if isinstance(e, A.Destructor):
            bt = prune(self.expr(e.base, ctx))
            if not isinstance(bt, DatatypeType):
                self.err(e.span, "type-mismatch",
                         f"'.{e.name}' needs a datatype value")
                raise _Fail
            dt = self.signatures[bt.name]
            for c in dt.ctors:
                for f in c.fields:
                    if f.name == e.name:
                        self.refs[id(e)] = (dt, c, f)
                        return substitute_type(
                            self.type_of_ref(f.type, dt.type_params),
                            dict(zip(dt.type_params, bt.args)))
            self.err(e.span, "unresolved", f"{dt.name} has no field '{e.name}'")
            raise _Fail
        if isinstance(e, A.IsCtor):
            bt = prune(self.expr(e.base, ctx))
            if not (isinstance(bt, DatatypeType)
                    and self.ctor_owner.get(e.ctor) is self.signatures[bt.name]):
                self.err(e.span, "unresolved", f"no constructor '{e.ctor}'")
            return BOOL
        if isinstance(e, A.IfExpr):
            self.expect_type(e.cond, self.expr(e.cond, ctx), BOOL, "condition")
            t = self.expr(e.then, ctx)
            self.expect_type(e.els, self.expr(e.els, ctx), t, "else branch")
            return t
        raise TypeError(e)

    def binary(self, e: A.Binary, ctx):
        lt = self.expr(e.left, ctx)
        rt = self.expr(e.right, ctx)
        op = e.op
        if op in ARITH:
            self.expect_type(e.left, lt, INT, f"left operand of '{op}'")
            self.expect_type(e.right, rt, INT, f"right operand of '{op}'")
            return INT
        if op in ORDER:
            self.expect_type(e.left, lt, INT, f"left operand of '{op}'")
            self.expect_type(e.right, rt, INT, f"right operand of '{op}'")
            return BOOL
        if op in ("==", "!="):
            if not self.unify(lt, rt):
                self.err(e.span, "type-mismatch",
                         f"cannot compare {zonk_copy(lt)} with {zonk_copy(rt)}")
            return BOOL
        if op in LOGIC:
            self.expect_type(e.left, lt, BOOL, f"left operand of '{op}'")
            self.expect_type(e.right, rt, BOOL, f"right operand of '{op}'")
            return BOOL
        raise TypeError(op)

    def fn_call(self, e: A.FnCall, ctx):
        target = self.signatures.get(e.name)
        dt = self.ctor_owner.get(e.name)
        if dt is not None:
            ctor = next(c for c in dt.ctors if c.name == e.name)
            inst = {tp: self.fresh_meta() for tp in dt.type_params}
            if len(e.args) != len(ctor.fields):
                self.err(e.span, "arity-mismatch",
                         f"constructor '{e.name}' expects {len(ctor.fields)} "
                         f"argument(s)")
                raise _Fail
            for a, f in zip(e.args, ctor.fields):
                ft = substitute_type(self.type_of_ref(f.type, dt.type_params),
                                     inst)
                self.expect_type(a, self.expr(a, ctx), ft, f"field '{f.name}'")
            self.refs[id(e)] = ("ctor", dt, ctor)
            return DatatypeType(dt.name, tuple(inst[tp] for tp in dt.type_params))
        if isinstance(target, A.Method):
            self.err(e.span, "type-mismatch",
                     f"method '{e.name}' cannot be called in an expression")
            raise _Fail
        if not isinstance(target, A.Function):
            self.err(e.span, "unresolved", f"unknown function '{e.name}'")
            raise _Fail
        self.call_graph[ctx.decl.name].add(target.name)
        if len(e.args) != len(target.params):
            self.err(e.span, "arity-mismatch",
                     f"'{e.name}' expects {len(target.params)} argument(s), "
                     f"got {len(e.args)}")
            raise _Fail
        inst = {tp: self.fresh_meta() for tp in target.type_params}
        for a, p in zip(e.args, target.params):
            pt = substitute_type(self.type_of_ref(p.type, target.type_params),
                                 inst)
            self.expect_type(a, self.expr(a, ctx), pt, f"argument '{p.name}'")
        self.refs[id(e)] = ("function", target, inst)
        return substitute_type(self.type_of_ref(target.result_type,
                                                target.type_params), inst)


def zonk_copy(t):
    """Printable view of a type without committing unsolved metas."""
    t = prune(t)
    if isinstance(t, ArrayType):
        return ArrayType(zonk_copy(t.elem))
    if isinstance(t, SeqType):
        return SeqType(zonk_copy(t.elem))
    if isinstance(t, MultisetType):
        return MultisetType(zonk_copy(t.elem))
    if isinstance(t, DatatypeType):
        return DatatypeType(t.name, tuple(zonk_copy(a) for a in t.args))
    return t


@dataclass
class Ctx:
    decl: object
    scopes: list
    tparams: list
    two_state: bool
    ghost: bool

    def lookup(self, name):
        for s in reversed(self.scopes):
            if name in s:
                return s[name]
        return None

    def nested(self, ghost=None):
        return Ctx(self.decl, self.scopes + [{}], self.tparams, self.two_state,
                   self.ghost if ghost is None else ghost)


# ---------------------------------------------------------------- entry points

def resolve_and_typecheck(program: A.Program):
    """Return a TypedProgram, or the list of Diagnostics on failure."""
    r = Resolver(program)
    tp = r.run()
    diags = r.diags + check_definite_assignment(tp)
    if diags:
        return sorted(diags, key=Diagnostic.sort_key)
    return tp


def resolve_or_raise(program) -> TypedProgram:
    result = resolve_and_typecheck(program)
    if isinstance(result, list):
        raise DiagnosticError(result)
    return result


def check_definite_assignment(tp: TypedProgram):
    diags = []
    for d in tp.program.decls:
        if not isinstance(d, A.Method) or d.body is None or not d.outs:
            continue
        done = _assigned(d.body, set())
        for p in d.outs:
            if p.name not in done:
                diags.append(error(d.span, "definite-assignment",
                                   f"out-parameter '{p.name}' might not be "
                                   f"assigned on every path"))
    return diags


def _assigned(stmts, done):
    done = set(done)
    for s in stmts:
        if isinstance(s, A.Assign):
            done |= {e.name for e in s.lhs if isinstance(e, A.Var)}
        elif isinstance(s, A.VarDecl) and s.init is not None:
            done |= set(s.names)
        elif isinstance(s, A.ArrayAlloc) and isinstance(s.target, A.Var):
            done.add(s.target.name)
        elif isinstance(s, A.Call):
            done |= {e.name for e in s.targets if isinstance(e, A.Var)}
        elif isinstance(s, A.If) and s.els is not None:
            done |= _assigned(s.then, done) & _assigned(s.els, done)
        elif isinstance(s, A.Match):
            branches = [_assigned(c.body, done) for c in s.cases]
            if branches:
                done |= set.intersection(*branches)
        elif isinstance(s, A.Block):
            done |= _assigned(s.stmts, done)
    return done


# ---------------------------------------------------------------- ghost check

GHOST_FLOW = "ghost value flows into compiled context"


class _GhostChecker:
    def __init__(self, tp: TypedProgram):
        self.tp = tp
        self.diags = []

    def is_ghost(self, e) -> bool:
        tp = self.tp
        if isinstance(e, A.Var):
            info = tp.refs.get(id(e))
            return isinstance(info, VarInfo) and info.ghost
        if isinstance(e, A.FnCall):
            ref = tp.refs.get(id(e))
            if ref and ref[0] == "function" and not ref[1].is_compiled:
                return True
            return any(self.is_ghost(a) for a in e.args)
        if isinstance(e, (A.Old, A.Quantifier)):
            return True
        for child in children(e):
            if self.is_ghost(child):
                return True
        return False

    def flag(self, e):
        if self.is_ghost(e):
            span = self.culprit(e) or e.span
            self.diags.append(error(span, "ghost-flow", GHOST_FLOW))

    def culprit(self, e):
        if isinstance(e, A.Var) and self.is_ghost(e):
            return e.span
        if isinstance(e, (A.Old, A.Quantifier)):
            return e.span
        if isinstance(e, A.FnCall):
            ref = self.tp.refs.get(id(e))
            if ref and ref[0] == "function" and not ref[1].is_compiled:
                return e.span
        for c in children(e):
            s = self.culprit(c)
            if s is not None:
                return s
        return None

    def target_ghost(self, t):
        if isinstance(t, A.Var):
            info = self.tp.refs.get(id(t))
            return isinstance(info, VarInfo) and info.ghost
        return False

    def stmts(self, stmts):
        for s in stmts:
            self.stmt(s)

    def stmt(self, s):
        if isinstance(s, A.VarDecl):
            if not s.ghost and s.init:
                for e in s.init:
                    self.flag(e)
        elif isinstance(s, A.Assign):
            for lhs, rhs in zip(s.lhs, s.rhs):
                if self.target_ghost(lhs):
                    continue
                self.flag(rhs)
                if isinstance(lhs, A.Index):
                    self.flag(lhs.base)
                    self.flag(lhs.index)
        elif isinstance(s, A.ArrayAlloc):
            if not s.ghost and not self.target_ghost(s.target):
                self.flag(s.length)
        elif isinstance(s, A.If):
            self.flag(s.cond)
            self.stmts(s.then)
            if s.els:
                self.stmts(s.els)
        elif isinstance(s, A.While):
            self.flag(s.guard)
            self.stmts(s.body)
        elif isinstance(s, A.Call):
            callee = self.tp.signatures.get(s.callee)
            if isinstance(callee, A.Method) and not callee.ghostly:
                for a, p in zip(s.args, callee.ins):
                    if not p.ghost:
                        self.flag(a)
        elif isinstance(s, A.Match):
            self.flag(s.scrutinee)
            for c in s.cases:
                self.stmts(c.body)


def check_ghost(tp: TypedProgram):
    """Diagnostics for ghost values reaching compiled code."""
    g = _GhostChecker(tp)
    for d in tp.program.decls:
        if isinstance(d, A.Method) and d.body is not None and not d.ghostly:
            g.stmts(d.body)
        elif isinstance(d, A.Function) and d.is_compiled and d.body is not None:
            g.flag(d.body)
    return sorted(g.diags, key=Diagnostic.sort_key)


# ---------------------------------------------------------------- frame check

def children(e):
    if isinstance(e, A.Binary):
        return [e.left, e.right]
    if isinstance(e, A.Unary):
        return [e.operand]
    if isinstance(e, A.FnCall):
        return list(e.args)
    if isinstance(e, A.Index):
        return [e.base, e.index]
    if isinstance(e, (A.ArrayLength, A.Destructor, A.IsCtor)):
        return [e.base]
    if isinstance(e, A.Slice):
        return [x for x in (e.base, e.lo, e.hi) if x is not None]
    if isinstance(e, A.MultisetOf):
        return [e.arg]
    if isinstance(e, A.Old):
        return [e.expr]
    if isinstance(e, A.Quantifier):
        return [e.body]
    if isinstance(e, A.IfExpr):
        return [e.cond, e.then, e.els]
    return []


def _names(exprs):
    return {e.name for e in exprs if isinstance(e, A.Var)}


class _FrameChecker:
    def __init__(self, tp: TypedProgram):
        self.tp = tp
        self.diags = []

    def is_array(self, e):
        return isinstance(prune(self.tp.types.get(id(e))), ArrayType)

    def reads_expr(self, e, allowed):
        if isinstance(e, (A.Index, A.Slice)) and self.is_array(e.base):
            if not (isinstance(e.base, A.Var) and e.base.name in allowed):
                self.diags.append(error(
                    e.span, "insufficient-reads",
                    "insufficient reads clause to read array element"))
        if isinstance(e, A.FnCall):
            ref = self.tp.refs.get(id(e))
            if ref and ref[0] == "function":
                callee = ref[1]
                formals = [p.name for p in callee.params]
                for r in callee.reads:
                    if isinstance(r, A.Var) and r.name in formals:
                        actual = e.args[formals.index(r.name)]
                        if not (isinstance(actual, A.Var)
                                and actual.name in allowed):
                            self.diags.append(error(
                                e.span, "insufficient-reads",
                                f"insufficient reads clause to call "
                                f"'{callee.name}'"))
                    elif not (isinstance(r, A.Var) and r.name in allowed):
                        self.diags.append(error(
                            e.span, "insufficient-reads",
                            f"insufficient reads clause to call "
                            f"'{callee.name}'"))
        for c in children(e):
            self.reads_expr(c, allowed)

    def function(self, d: A.Function):
        allowed = _names(d.reads)
        for r in d.requires:
            self.reads_expr(r, allowed)
        if d.body is not None:
            self.reads_expr(d.body, allowed)

    def method(self, d: A.Method):
        if d.is_lemma and d.modifies:
            self.diags.append(error(d.modifies[0].span, "modifies-violation",
                                    "a lemma cannot have a modifies clause"))
        if d.body is None:
            return
        allowed = _names(d.modifies)
        fresh = set()
        self.stmts(d.body, allowed, fresh)

    def stmts(self, stmts, allowed, fresh):
        for s in stmts:
            if isinstance(s, A.Assign):
                for lhs in s.lhs:
                    if isinstance(lhs, A.Index):
                        b = lhs.base
                        if not (isinstance(b, A.Var)
                                and (b.name in allowed or b.name in fresh)):
                            self.diags.append(error(
                                lhs.span, "modifies-violation",
                                "assignment may update an array element not "
                                "in the enclosing method's modifies clause"))
                    elif isinstance(lhs, A.Var):
                        fresh.discard(lhs.name)
            elif isinstance(s, A.ArrayAlloc) and isinstance(s.target, A.Var):
                fresh.add(s.target.name)
            elif isinstance(s, A.Call):
                callee = self.tp.signatures.get(s.callee)
                if isinstance(callee, A.Method):
                    formals = [p.name for p in callee.ins]
                    for m in callee.modifies:
                        ok = False
                        if isinstance(m, A.Var) and m.name in formals:
                            actual = s.args[formals.index(m.name)]
                            ok = isinstance(actual, A.Var) and (
                                actual.name in allowed or actual.name in fresh)
                        if not ok:
                            self.diags.append(error(
                                s.span, "modifies-violation",
                                "call may modify an array not in the "
                                "enclosing method's modifies clause"))
                    for t in s.targets:
                        if isinstance(t, A.Var):
                            fresh.discard(t.name)
            elif isinstance(s, A.If):
                self.stmts(s.then, allowed, set(fresh))
                if s.els:
                    self.stmts(s.els, allowed, set(fresh))
            elif isinstance(s, A.While):
                self.stmts(s.body, allowed, set(fresh))
            elif isinstance(s, A.Match):
                for c in s.cases:
                    self.stmts(c.body, allowed, set(fresh))
            elif isinstance(s, A.Calc):
                for h in s.hints:
                    self.stmts(h, allowed, set(fresh))


def check_frames(tp: TypedProgram):
    """Syntactic reads/modifies checking; callee frames are checked at each
    call, which makes the check transitive over the call graph."""
    f = _FrameChecker(tp)
    for d in tp.program.decls:
        if isinstance(d, A.Function):
            f.function(d)
        elif isinstance(d, A.Method):
            f.method(d)
    return sorted(f.diags, key=Diagnostic.sort_key)


def front_end(program: A.Program):
    """Run all front-end checks; returns ``(typed_program, diagnostics)``."""
    result = resolve_and_typecheck(program)
    if isinstance(result, list):
        return None, result
    diags = check_ghost(result) + check_frames(result) + check_calc(result)
    return result, sorted(diags, key=Diagnostic.sort_key)


def check_calc(tp: TypedProgram):
    """Every calc chain must compose into a single relation."""
    from minivc.vcgen import _walk_stmts, calc_relation
    diags = []
    for d in tp.program.decls:
        if not isinstance(d, A.Method) or d.body is None:
            continue
        for s in _walk_stmts(d.body):
            if isinstance(s, A.Calc):
                try:
                    calc_relation(s.ops, s.op_spans or [s.span] * len(s.ops))
                except DiagnosticError as exc:
                    diags.extend(exc.diagnostics)
    return diags
