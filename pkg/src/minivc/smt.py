"""SMT-LIB2 lowering, solver process driving and model parsing."""

from __future__ import annotations

import os
import re
import shutil
import subprocess
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from minivc import logic as L
from minivc.logic import BOOL, FUEL, INT, REF, App, Const, IntVal, Quant, Sort

# Names are emitted verbatim when they are SMT-LIB simple symbols and quoted
# with |...| otherwise (program variables such as i' or bound names x#3).
_SIMPLE = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/\-][A-Za-z0-9~!@$%^&*_+=<>.?/\-]*$")
RESERVED = {"true", "false", "and", "or", "not", "ite", "let", "forall",
            "exists", "select", "store", "div", "mod", "distinct", "_", "!",
            "as", "par", "NUMERAL", "DECIMAL", "STRING"}


def symbol(name: str) -> str:
    if _SIMPLE.match(name) and name not in RESERVED:
        return name
    return "|" + name.replace("|", "") + "|"


_OPS = {"neg": "-"}


def term_to_smt(t) -> str:
    if isinstance(t, Const):
        return symbol(t.name)
    if isinstance(t, IntVal):
        return str(t.value) if t.value >= 0 else f"(- {-t.value})"
    if isinstance(t, L.BoolVal):
        return "true" if t.value else "false"
    if isinstance(t, App):
        if t.op.startswith("is:"):
            return f"((_ is {symbol(t.op[3:])}) {term_to_smt(t.args[0])})"
        op = _OPS.get(t.op, t.op)
        if not L.is_builtin(t.op):
            op = symbol(op)
        if not t.args:
            return op
        return f"({op} {' '.join(term_to_smt(a) for a in t.args)})"
    if isinstance(t, Quant):
        vs = " ".join(f"({symbol(v.name)} {v.sort.smt()})" for v in t.vars)
        body = term_to_smt(t.body)
        if t.patterns:
            pats = " ".join(":pattern (" + " ".join(term_to_smt(p) for p in ps) + ")"
                            for ps in t.patterns)
            body = f"(! {body} {pats})"
        return f"({t.kind} ({vs}) {body})"
    raise TypeError(t)


# ---------------------------------------------------------------- scripts

@dataclass
class SmtScript:
    text: str
    has_quantifiers: bool
    symbols: Dict[str, Sort] = field(default_factory=dict)

    def __str__(self):
        return self.text


def fuel_term(n: int):
    t = App("FZ", (), FUEL)
    for _ in range(n):
        t = App("FS", (t,), FUEL)
    return t


def _fuel_free(term, fuel):
    from minivc.vcgen import FUEL_TOP
    return L.substitute(term, {FUEL_TOP: fuel_term(fuel)})


class _Axioms:
    """Collect the axioms an obligation needs, closed under the symbols the
    axioms themselves mention."""

    def __init__(self, theory, fuel):
        self.theory = theory
        self.fuel = fuel
        self.out: List[L.Term] = []
        self.done = set()

    def visit(self, terms):
        pending = list(terms)
        while pending:
            t = pending.pop()
            for x in L.subterms(t):
                if isinstance(x, App):
                    new = self.for_symbol(x)
                    pending.extend(new)

    def add(self, key, axioms):
        if key in self.done:
            return []
        self.done.add(key)
        self.out.extend(axioms)
        return axioms

    def for_symbol(self, x: App):
        th = self.theory
        op = x.op
        if op == "len":
            r = Const("r", REF)
            return self.add("len", [L.quant("forall", (r,), L.mk(">=", (
                App("len", (r,), INT), IntVal(0))), [[App("len", (r,), INT)]])])
        if th is not None and op in th.functions:
            return self.add(("fn", op), function_axioms(th.functions[op], self.fuel))
        if op.startswith("Seq_") and "." in op:
            s = x.args[0].sort if op.endswith((".len", ".at", ".ms")) else x.sort
            elem = th.elem_sort_of_seq(s)
            return self.add(("seq", elem), seq_axioms(elem))
        if th is not None:
            sort_name = op[3:].rsplit(".", 1)[0] if op.startswith("is:") \
                else op.rsplit(".", 1)[0]
            inst = th.datatypes.get(sort_name)
            if inst is not None:
                return self.add(("dt", sort_name),
                                datatype_axioms(inst, set(th.datatypes)))
        return []


def function_axioms(fd, fuel):
    fu = fd.fuel_var
    args = list(fd.heaps) + list(fd.params)
    succ = App("FS", (fu,), FUEL)
    head = App(fd.name, [succ] + args, fd.result)
    vars_ = [fu] + args
    out = [L.quant("forall", vars_, L.Eq(head, App(fd.name, [fu] + args, fd.result)),
                   [[head]])]
    if fd.body is not None:
        body = _fuel_free(fd.body, fuel)
        pre = _fuel_free(fd.pre, fuel)
        out.append(L.quant("forall", vars_, L.Implies(pre, L.Eq(head, body)), [[head]]))
    return out


def seq_axioms(elem: Sort):
    from minivc.vcgen import seq_sort_name
    sname = seq_sort_name(elem)
    S = Sort(sname)
    carr = L.array_sort(INT, elem)
    c = Const("c", carr)
    lo, hi, k, i, j = (Const(n, INT) for n in ("lo", "hi", "k", "i", "j"))
    v = Const("v", elem)
    s = Const("s", S)
    x = Const("x", elem)

    def slice_(a, l, h):
        return App(f"{sname}.slice", (a, l, h), S)

    def length(q):
        return App(f"{sname}.len", (q,), INT)

    def at(q, n):
        return App(f"{sname}.at", (q, n), elem)

    def ms(q):
        return App(f"{sname}.ms", (q,), L.array_sort(elem, INT))

    le = lambda a, b: L.mk("<=", (a, b))  # noqa: E731
    lt = lambda a, b: L.mk("<", (a, b))  # noqa: E731
    sl = slice_(c, lo, hi)
    swapped = L.mk("store", (L.mk("store", (c, i, L.mk("select", (c, j)))), j,
                              L.mk("select", (c, i))))
    swap_term = ms(slice_(swapped, lo, hi))
    stored = slice_(L.mk("store", (c, i, v)), lo, hi)
    count = L.mk("select", (ms(s), x))
    return [
        L.quant("forall", (s,), le(IntVal(0), length(s)), [[length(s)]]),
        L.quant("forall", (c, lo, hi), L.Implies(le(lo, hi), L.Eq(
            length(sl), L.mk("-", (hi, lo)))), [[sl]]),
        L.quant("forall", (c, lo, hi, k), L.Implies(
            L.And(le(IntVal(0), k), lt(k, L.mk("-", (hi, lo)))),
            L.Eq(at(sl, k), L.mk("select", (c, L.mk("+", (lo, k)))))),
            [[at(sl, k)]]),
        L.quant("forall", (c, i, j, lo, hi), L.Implies(
            L.And(le(lo, i), lt(i, hi), le(lo, j), lt(j, hi)),
            L.Eq(swap_term, ms(sl))), [[swap_term]]),
        L.quant("forall", (c, i, v, lo, hi), L.Implies(
            L.Or(lt(i, lo), le(hi, i)), L.Eq(stored, slice_(c, lo, hi))), [[stored]]),
        L.quant("forall", (s, x), le(IntVal(0), count), [[count]]),
    ]


def datatype_axioms(inst, dt_names):
    S = inst.sort
    rank = inst.rank_name()
    d = Const("d", S)
    out = [L.quant("forall", (d,), L.mk(">=", (App(rank, (d,), INT), IntVal(0))),
                   [[App(rank, (d,), INT)]])]
    for cname, fields, _ in inst.ctors:
        vs = [Const(f"f{k}", fs) for k, (_, fs) in enumerate(fields)]
        term = App(cname, vs, S)
        total = IntVal(1) if vs else IntVal(0)
        for v in vs:
            if v.sort.name in dt_names:
                total = L.mk("+", (total, App(f"{v.sort.name}.$rank", (v,), INT)))
        eq = L.Eq(App(rank, (term,), INT), total)
        out.append(L.quant("forall", vs, eq, [[term]]) if vs else eq)
        tester = App(f"is:{cname}", (d,), BOOL)
        for (fname, fs) in fields:
            if fs.name in dt_names:
                sel = App(fname, (d,), fs)
                out.append(L.quant("forall", (d,), L.Implies(tester, L.mk(
                    "<", (App(f"{fs.name}.$rank", (sel,), INT), App(rank, (d,), INT)))),
                    [[sel]]))
    return out


def lower(ob, fuel: Optional[int] = None) -> SmtScript:
    """Encode validity of ``hypotheses ⟹ goal`` as unsatisfiability."""
    from minivc.vcgen import Unsupported
    fuel = ob.fuel if fuel is None else fuel
    theory = ob.theory
    hyps = [_fuel_free(h, fuel) for h in ob.hypotheses]
    goal = _fuel_free(ob.goal, fuel)
    ax = _Axioms(theory, fuel)
    ax.visit(hyps + [goal])
    axioms = ax.out
    everything = axioms + hyps + [goal]

    sorts, funs, consts = set(), {}, {}
    dt_syms = set()
    if theory is not None:
        for inst in theory.datatypes.values():
            for cname, fields, _ in inst.ctors:
                dt_syms.add(cname)
                dt_syms.update(f for f, _ in fields)
    dt_syms |= {"FZ", "FS"}
    for t in everything:
        for x in L.subterms(t):
            if isinstance(x, Const):
                consts[x.name] = x.sort
            elif isinstance(x, App) and not L.is_builtin(x.op) and x.op not in dt_syms:
                sig = (tuple(a.sort for a in x.args), x.sort)
                if x.op in funs and funs[x.op] != sig:
                    raise Unsupported(f"symbol {x.op} used at two signatures")
                funs[x.op] = sig
            if isinstance(x, L.Term):
                _collect_sorts(x.sort, sorts)
    for t in everything:
        for q in L.subterms(t):
            if isinstance(q, Quant):
                for v in q.vars:
                    consts.pop(v.name, None)
    # bound names never clash with declared ones: they carry '#' or are
    # confined to axioms; re-add genuinely free constants
    free = set()
    for t in hyps + [goal]:
        free |= L.free_consts(t)
    for t in axioms:
        free |= L.free_consts(t)
    consts = {c.name: c.sort for c in free}

    lines = ["; minivc obligation",
             f"; {ob.decl} {ob.kind} {ob.span}",
             "(set-option :auto_config false)",
             "(set-option :smt.mbqi false)",
             "(set-option :produce-models true)",
             "(set-logic ALL)",
             "(push)"]
    uninterpreted = sorted(s.name for s in sorts
                           if s.name == "Ref" or s.name.startswith(("Seq_", "tv_")))
    for name in uninterpreted:
        lines.append(f"(declare-sort {symbol(name)} 0)")
    lines.append("(declare-datatypes ((Fuel 0)) (((FZ) (FS (FS.prev Fuel)))))")
    if theory is not None and theory.datatypes:
        insts = sorted(theory.datatypes.values(), key=lambda i: i.sort.name)
        heads = " ".join(f"({symbol(i.sort.name)} 0)" for i in insts)
        bodies = []
        for inst in insts:
            ctors = []
            for cname, fields, _ in inst.ctors:
                fs = "".join(f" ({symbol(f)} {s.smt()})" for f, s in fields)
                ctors.append(f"({symbol(cname)}{fs})")
            bodies.append("(" + " ".join(ctors) + ")")
        lines.append(f"(declare-datatypes ({heads}) ({' '.join(bodies)}))")
    for name in sorted(consts):
        lines.append(f"(declare-fun {symbol(name)} () {consts[name].smt()})")
    for name in sorted(funs):
        args, res = funs[name]
        lines.append(f"(declare-fun {symbol(name)} ({' '.join(a.smt() for a in args)})"
                     f" {res.smt()})")
    for a in axioms:
        lines.append(f"(assert {term_to_smt(a)})")
    for h in hyps:
        lines.append(f"(assert {term_to_smt(h)})")
    lines.append(f"(assert (not {term_to_smt(goal)}))")
    lines.append("(check-sat)")
    lines.append("(get-info :reason-unknown)")
    lines.append("(get-model)")
    quants = any(L.has_quantifier(t) for t in everything)
    symbols = dict(consts)
    return SmtScript("\n".join(lines) + "\n", quants, symbols)


def _collect_sorts(s: Sort, acc):
    acc.add(s)
    for a in s.args:
        _collect_sorts(a, acc)


# ---------------------------------------------------------------- solving

@dataclass
class SolverVerdict:
    status: str                       # proved, refuted, unknown, timeout, solver-error
    model: Dict[str, object] = field(default_factory=dict)
    wall_time: float = 0.0
    text: str = ""
    candidate: Optional["Model"] = None

    @property
    def proved(self):
        return self.status == "proved"


class SolverConfigError(Exception):
    pass


def find_solver(path: Optional[str] = None) -> str:
    path = path or os.environ.get("MINIVC_SOLVER") or "z3"
    found = shutil.which(path) if not os.path.sep in path else (
        path if os.access(path, os.X_OK) else None)
    if not found:
        raise SolverConfigError(f"SMT solver '{path}' not found; set --solver-path "
                                f"or MINIVC_SOLVER")
    return found


def run_solver(script, timeout: float = 10.0, solver_path: Optional[str] = None
               ) -> SolverVerdict:
    """Run the solver on ``script``: unsat → proved, sat → refuted,
    unknown → unknown (a candidate model, if any, is attached)."""
    text = script.text if isinstance(script, SmtScript) else str(script)
    exe = find_solver(solver_path)
    cmd = [exe, "-in"]
    if "z3" in os.path.basename(exe):
        cmd.append(f"-t:{max(1, int(timeout * 1000))}")
    start = time.monotonic()
    try:
        proc = subprocess.run(cmd, input=text, capture_output=True, text=True,
                              timeout=timeout + 5.0)
    except subprocess.TimeoutExpired:
        return SolverVerdict("timeout", wall_time=time.monotonic() - start)
    except OSError as exc:
        return SolverVerdict("solver-error", text=str(exc),
                             wall_time=time.monotonic() - start)
    elapsed = time.monotonic() - start
    out = proc.stdout.strip()
    first = out.split(None, 1)[0] if out else ""
    if first == "unsat":
        return SolverVerdict("proved", wall_time=elapsed)
    if first in ("sat", "unknown"):
        reason = ""
        m = re.search(r'\(:reason-unknown "([^"]*)"\)', out)
        if m:
            reason = m.group(1)
        if first == "unknown" and ("timeout" in reason or "canceled" in reason):
            return SolverVerdict("timeout", wall_time=elapsed, text=reason)
        if elapsed >= timeout and first == "unknown":
            return SolverVerdict("timeout", wall_time=elapsed, text=reason)
        model = None
        try:
            model = parse_model(out)
        except ValueError:
            model = None
        status = "refuted" if first == "sat" else "unknown"
        return SolverVerdict(status, wall_time=elapsed, text=reason, candidate=model)
    if first == "timeout":
        return SolverVerdict("timeout", wall_time=elapsed)
    return SolverVerdict("solver-error", wall_time=elapsed,
                         text=(proc.stderr or proc.stdout).strip()[:2000])


def check(ob, fuel: Optional[int] = None, timeout: float = 10.0,
          solver_path: Optional[str] = None, dump=None) -> SolverVerdict:
    """Discharge one obligation; models are confirmed by evaluation before a
    verdict is reported as refuted."""
    from minivc.vcgen import Unsupported
    if ob.goal == L.TRUE:
        return SolverVerdict("proved")
    try:
        script = lower(ob, fuel)
    except (Unsupported, KeyError) as exc:
        return SolverVerdict("solver-error", text=f"unsupported construct: {exc}")
    if dump is not None:
        dump(script)
    verdict = run_solver(script, timeout, solver_path)
    if verdict.status not in ("refuted", "unknown") or verdict.candidate is None:
        if verdict.status == "refuted":
            verdict.status = "unknown"
        return verdict
    confirmed = confirm(ob, verdict.candidate, fuel if fuel is not None else ob.fuel)
    if confirmed is True:
        verdict.status = "refuted"
        verdict.model = bindings(ob, verdict.candidate)
    elif confirmed is None and verdict.status == "refuted" and not script.has_quantifiers:
        verdict.model = bindings(ob, verdict.candidate)
    else:
        verdict.status = "unknown"
        verdict.model = bindings(ob, verdict.candidate)
    return verdict


def confirm(ob, model, fuel=2) -> Optional[bool]:
    """Evaluate ``hypotheses ∧ ¬goal`` under the model: True means the model
    is a genuine counterexample, None means it could not be evaluated."""
    from minivc import interp
    try:
        for h in ob.hypotheses:
            if not interp.eval_formula(h, model, ob.theory, fuel=fuel):
                return False
        return not interp.eval_formula(ob.goal, model, ob.theory, fuel=fuel)
    except interp.Unevaluable:
        return None
    except RecursionError:
        return None


def bindings(ob, model) -> Dict[str, object]:
    names = set()
    for t in list(ob.hypotheses) + [ob.goal]:
        for c in L.free_consts(t):
            if not c.name.startswith("$") and c.name != "null":
                names.add(c.name)
    out = {}
    for n in sorted(names):
        if n in model.values:
            out[n] = render_value(model.values[n])
    return out


def render_value(v):
    if isinstance(v, (bool, int)):
        return v
    return str(v)


# ---------------------------------------------------------------- models

_TOKEN = re.compile(r'\s+|;[^\n]*|\(|\)|\|[^|]*\||"[^"]*"|[^\s()|";]+')


def parse_sexprs(text: str):
    stack = [[]]
    for m in _TOKEN.finditer(text):
        tok = m.group()
        if tok.isspace() or tok.startswith(";"):
            continue
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ValueError("unbalanced model text")
            done = stack.pop()
            stack[-1].append(done)
        else:
            if tok.startswith("|"):
                tok = tok[1:-1]
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ValueError("unbalanced model text")
    return stack[0]


@dataclass(frozen=True)
class ModelRef:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class ModelDt:
    ctor: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.ctor
        return f"{self.ctor}({', '.join(str(a) for a in self.args)})"


class ModelArray:
    def __init__(self, default=None, entries=None, fn=None):
        self.default = default
        self.entries = dict(entries or {})
        self.fn = fn

    def get(self, key):
        if key in self.entries:
            return self.entries[key]
        if self.fn is not None:
            return self.fn(key)
        return self.default

    def store(self, key, value):
        return ModelArray(self.default, {**self.entries, key: value}, self.fn)

    def __str__(self):
        parts = [f"{k}:={v}" for k, v in self.entries.items()]
        if self.default is not None:
            parts.append(f"else {self.default}")
        return "[" + ", ".join(parts) + "]"


class ModelFun:
    def __init__(self, params, body, model):
        self.params = params
        self.body = body
        self.model = model

    def __call__(self, *args):
        env = dict(zip(self.params, args))
        return self.model.eval_sexpr(self.body, env)


class Model:
    """A parsed solver model with an evaluator for its definitions."""

    def __init__(self):
        self.values: Dict[str, object] = {}
        self.funs: Dict[str, ModelFun] = {}
        self.raw: Dict[str, object] = {}
        self.universe = set()

    def lookup(self, name):
        if name in self.values:
            return self.values[name]
        raise KeyError(name)

    def apply(self, name, args):
        f = self.funs.get(name)
        if f is None:
            raise KeyError(name)
        return f(*args)

    def eval_sexpr(self, s, env):
        if isinstance(s, str):
            if s in env:
                return env[s]
            if s == "true":
                return True
            if s == "false":
                return False
            if re.fullmatch(r"\d+", s):
                return int(s)
            if s in self.values:
                return self.values[s]
            if s in self.raw:
                v = self.eval_sexpr(self.raw[s], {})
                self.values[s] = v
                return v
            if "!val!" in s or s in self.universe:
                return ModelRef(s)
            return ModelDt(s)
        head = s[0]
        if isinstance(head, list):
            if head[0] == "as" and head[1] == "const":
                return ModelArray(self.eval_sexpr(s[1], env))
            if head[0] == "_" and head[1] == "is":
                v = self.eval_sexpr(s[1], env)
                return isinstance(v, ModelDt) and v.ctor == head[2]
            raise ValueError(f"unsupported model term {s}")
        args = s[1:]
        if head == "_" and args[0] == "as-array":
            fname = args[1]
            return ModelArray(fn=lambda k, f=fname: self.apply(f, [k]))
        if head == "let":
            inner = dict(env)
            for name, val in args[0]:
                inner[name] = self.eval_sexpr(val, env)
            return self.eval_sexpr(args[1], inner)
        if head == "ite":
            c = self.eval_sexpr(args[0], env)
            return self.eval_sexpr(args[1] if c else args[2], env)
        vals = [self.eval_sexpr(a, env) for a in args]
        if head == "-" and len(vals) == 1:
            return -vals[0]
        simple = {
            "+": lambda v: sum(v),
            "-": lambda v: v[0] - sum(v[1:]),
            "*": lambda v: _prod(v),
            "div": lambda v: L.euclid_div(v[0], v[1]),
            "mod": lambda v: L.euclid_mod(v[0], v[1]),
            "<": lambda v: v[0] < v[1], "<=": lambda v: v[0] <= v[1],
            ">": lambda v: v[0] > v[1], ">=": lambda v: v[0] >= v[1],
            "=": lambda v: all(x == v[0] for x in v[1:]),
            "and": lambda v: all(v), "or": lambda v: any(v),
            "not": lambda v: not v[0], "=>": lambda v: (not v[0]) or v[1],
            "distinct": lambda v: len(set(v)) == len(v),
            "select": lambda v: v[0].get(v[1]),
            "store": lambda v: v[0].store(v[1], v[2]),
        }
        if head in simple:
            return simple[head](vals)
        if head in self.funs:
            return self.funs[head](*vals)
        return ModelDt(head, tuple(vals))


def _prod(v):
    out = 1
    for x in v:
        out *= x
    return out


def parse_model(output: str) -> Optional[Model]:
    exprs = parse_sexprs(output)
    block = None
    for e in exprs:
        if isinstance(e, list) and e and (e[0] == "model" or all(
                isinstance(x, list) and x and x[0] in ("define-fun", "declare-fun",
                                                       "forall")
                for x in e)) and any(isinstance(x, list) and x and x[0] == "define-fun"
                                     for x in e):
            block = e[1:] if e[0] == "model" else e
    if block is None:
        return None
    model = Model()
    for d in block:
        if not (isinstance(d, list) and d):
            continue
        if d[0] == "declare-fun" and not d[2]:
            model.universe.add(d[1])
    for d in block:
        if not (isinstance(d, list) and d and d[0] == "define-fun"):
            continue
        name, params, body = d[1], d[2], d[4]
        if params:
            model.funs[name] = ModelFun([p[0] for p in params], body, model)
        else:
            model.raw[name] = body
    for name in list(model.raw):
        model.values[name] = model.eval_sexpr(model.raw[name], {})
    return model
