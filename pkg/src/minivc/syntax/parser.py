"""Recursive-descent parser producing span-annotated ASTs."""

from __future__ import annotations

import copy

from minivc.diagnostics import Diagnostic, error
from minivc.syntax import ast as A
from minivc.syntax.lexer import LexError, Token, tokenize

RELOPS = ("==", "!=", "<", "<=", ">", ">=")
CALC_OPS = ("==", "!=", "<", "<=", ">", ">=", "==>", "<==", "<==>")
DECL_START = ("method", "function", "predicate", "lemma", "datatype")


class ParseError(Exception):
    def __init__(self, span, message):
        super().__init__(message)
        self.span = span


class Parser:
    def __init__(self, tokens, file):
        self.toks = tokens
        self.pos = 0
        self.file = file

    # ------------------------------------------------------------ helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, *texts):
        t = self.tok
        return t.kind in ("kw", "sym") and t.text in texts

    def advance(self):
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def accept(self, *texts):
        if self.at(*texts):
            return self.advance()
        return None

    def expect(self, text):
        if not self.at(text):
            self.fail(f"expected '{text}' but found {self.describe(self.tok)}")
        return self.advance()

    def ident(self):
        t = self.tok
        if t.kind != "ident":
            self.fail(f"expected identifier but found {self.describe(t)}")
        return self.advance()

    @staticmethod
    def describe(t):
        return "end of input" if t.kind == "eof" else f"'{t.text}'"

    def fail(self, message, span=None):
        raise ParseError(span or self.tok.span, message)

    def span_from(self, start: Token):
        last = self.toks[self.pos - 1] if self.pos > 0 else start
        s = start.span
        if last.span.line == s.line:
            length = max(last.span.col + last.span.length - s.col, 0)
        else:
            length = s.length
        return A.SourceSpan(self.file, s.line, s.col, length)

    # ------------------------------------------------------------ program

    def program(self, diags):
        decls = []
        while self.tok.kind != "eof":
            start = self.pos
            try:
                decls.append(self.declaration())
            except ParseError as e:
                diags.append(error(e.span, "syntax", str(e)))
                self.pos = max(self.pos, start + 1)
                self.recover()
        return A.Program(decls, file=self.file)

    def recover(self):
        while self.tok.kind != "eof":
            if self.at(*DECL_START):
                return
            if self.at("ghost") and self.peek().text == "method":
                return
            self.advance()

    def declaration(self):
        start = self.tok
        if self.accept("datatype"):
            return self.datatype(start)
        if self.at("ghost") and self.peek().text == "method":
            self.advance()
            self.advance()
            return self.method(start, is_lemma=False, is_ghost=True)
        if self.accept("method"):
            return self.method(start, is_lemma=False, is_ghost=False)
        if self.accept("lemma"):
            return self.method(start, is_lemma=True, is_ghost=True)
        if self.accept("function"):
            compiled = bool(self.accept("method"))
            return self.function(start, is_predicate=False, compiled=compiled)
        if self.accept("predicate"):
            compiled = bool(self.accept("method"))
            return self.function(start, is_predicate=True, compiled=compiled)
        self.fail(f"expected a declaration but found {self.describe(self.tok)}")

    def type_params(self):
        params = []
        if self.accept("<"):
            params.append(self.ident().text)
            while self.accept(","):
                params.append(self.ident().text)
            self.expect(">")
        return params

    def type_ref(self):
        t = self.tok
        if self.at("int", "bool", "array", "seq", "multiset") or t.kind == "ident":
            self.advance()
            args = []
            if self.accept("<"):
                args.append(self.type_ref())
                while self.accept(","):
                    args.append(self.type_ref())
                self.expect(">")
            return A.TypeRef(t.text, args, span=self.span_from(t))
        self.fail(f"expected a type but found {self.describe(t)}")

    def params(self):
        out = []
        self.expect("(")
        if not self.at(")"):
            while True:
                start = self.tok
                ghost = bool(self.accept("ghost"))
                name = self.ident().text
                self.expect(":")
                ty = self.type_ref()
                out.append(A.Param(name, ty, ghost, span=self.span_from(start)))
                if not self.accept(","):
                    break
        self.expect(")")
        return out

    def datatype(self, start):
        name = self.ident().text
        tparams = self.type_params()
        self.expect("=")
        ctors = [self.constructor()]
        while self.accept("|"):
            ctors.append(self.constructor())
        self.accept(";")
        return A.Datatype(name, tparams, ctors, span=self.span_from(start))

    def constructor(self):
        start = self.tok
        name = self.ident().text
        fields = self.params() if self.at("(") else []
        return A.Constructor(name, fields, span=self.span_from(start))

    def spec_clauses(self, allowed):
        clauses = {k: [] for k in allowed}
        decreases = None
        while self.at(*allowed):
            kw = self.advance().text
            if kw in ("modifies", "reads", "decreases"):
                items = self.expr_list()
                if kw == "decreases":
                    decreases = (decreases or []) + items
                else:
                    clauses[kw].extend(items)
            else:
                clauses[kw].append(self.expr())
            self.accept(";")
        return clauses, decreases

    def method(self, start, is_lemma, is_ghost):
        name = self.ident().text
        tparams = self.type_params()
        ins = self.params()
        outs = []
        if self.accept("returns"):
            outs = self.params()
        allowed = ("requires", "ensures", "modifies", "decreases")
        clauses, decreases = self.spec_clauses(allowed)
        body = self.block() if self.at("{") else None
        return A.Method(name, tparams, ins, outs, clauses["requires"],
                        clauses["ensures"], clauses["modifies"], decreases,
                        body, is_lemma=is_lemma, is_ghost=is_ghost,
                        span=self.span_from(start))

    def function(self, start, is_predicate, compiled):
        name = self.ident().text
        tparams = self.type_params()
        params = self.params()
        if is_predicate:
            result = A.TypeRef("bool", span=self.tok.span)
        else:
            self.expect(":")
            result = self.type_ref()
        allowed = ("requires", "reads", "decreases")
        clauses, decreases = self.spec_clauses(allowed)
        body = None
        if self.accept("{"):
            body = self.expr()
            self.expect("}")
        return A.Function(name, tparams, params, result, clauses["requires"],
                          clauses["reads"], decreases, body,
                          is_predicate=is_predicate, is_compiled=compiled,
                          span=self.span_from(start))

    # ------------------------------------------------------------ statements

    def block(self):
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("unterminated block")
            stmts.append(self.statement())
        self.expect("}")
        return stmts

    def statement(self):
        start = self.tok
        if self.at("var") or (self.at("ghost") and self.peek().text == "var"):
            return self.var_decl(start)
        if self.accept("if"):
            return self.if_stmt(start)
        if self.accept("while"):
            return self.while_stmt(start)
        if self.accept("assert"):
            e = self.expr()
            self.expect(";")
            return A.Assert(e, span=self.span_from(start))
        if self.accept("assume"):
            e = self.expr()
            self.expect(";")
            return A.Assume(e, span=self.span_from(start))
        if self.accept("calc"):
            return self.calc(start)
        if self.accept("match"):
            return self.match(start)
        return self.update(start)

    def var_decl(self, start):
        ghost = bool(self.accept("ghost"))
        self.expect("var")
        names, types = [], []
        while True:
            names.append(self.ident().text)
            types.append(self.type_ref() if self.accept(":") else None)
            if not self.accept(","):
                break
        init = None
        if self.accept(":="):
            if self.at("new"):
                if len(names) != 1:
                    self.fail("array allocation assigns exactly one variable")
                alloc = self.alloc(start, A.Var(names[0], span=start.span))
                alloc.declare = True
                alloc.ghost = ghost
                return alloc
            init = self.expr_list()
        self.expect(";")
        return A.VarDecl(names, types, ghost, init, span=self.span_from(start))

    def alloc(self, start, target):
        self.expect("new")
        ty = self.type_ref()
        self.expect("[")
        length = self.expr()
        self.expect("]")
        self.expect(";")
        return A.ArrayAlloc(target, ty, length, span=self.span_from(start))

    def update(self, start):
        lhs = self.expr_list()
        if self.accept(":="):
            if self.at("new"):
                if len(lhs) != 1:
                    self.fail("array allocation assigns exactly one target")
                return self.alloc(start, lhs[0])
            rhs = self.expr_list()
            self.expect(";")
            for e in lhs:
                if not isinstance(e, (A.Var, A.Index)):
                    self.fail("assignment target must be a variable or an "
                              "array element", e.span)
            return A.Assign(lhs, rhs, span=self.span_from(start))
        self.expect(";")
        if len(lhs) == 1 and isinstance(lhs[0], A.FnCall):
            call = lhs[0]
            return A.Call([], call.name, call.args, span=self.span_from(start))
        self.fail("expected an assignment or a call statement", start.span)

    def if_stmt(self, start):
        cond = self.expr()
        then = self.block()
        els = None
        if self.accept("else"):
            if self.at("if"):
                s = self.advance()
                els = [self.if_stmt(s)]
            else:
                els = self.block()
        return A.If(cond, then, els, span=self.span_from(start))

    def while_stmt(self, start):
        guard = self.expr()
        invariants = []
        decreases = None
        while self.at("invariant", "decreases", "modifies"):
            kw = self.advance().text
            if kw == "invariant":
                invariants.append(self.expr())
            elif kw == "decreases":
                decreases = (decreases or []) + self.expr_list()
            else:
                self.expr_list()
            self.accept(";")
        body = self.block()
        return A.While(guard, invariants, decreases, body,
                       span=A.SourceSpan(self.file, start.span.line,
                                         start.span.col, len("while")))

    def calc(self, start):
        self.expect("{")
        lines, ops, hints, op_spans = [], [], [], []
        if not self.at("}"):
            lines.append(self.expr())
            self.expect(";")
            while not self.at("}"):
                op_tok = self.tok
                op = "=="
                if self.at(*CALC_OPS):
                    op = self.advance().text
                hint = []
                if self.at("{"):
                    hint = self.block()
                ops.append(op)
                op_spans.append(op_tok.span)
                hints.append(hint)
                lines.append(self.expr())
                self.expect(";")
        self.expect("}")
        return A.Calc(lines, ops, hints, op_spans, span=self.span_from(start))

    def match(self, start):
        scrutinee = self.expr()
        braced = bool(self.accept("{"))
        cases = []
        while self.at("case"):
            cstart = self.advance()
            ctor = self.ident().text
            binders = []
            if self.accept("("):
                if not self.at(")"):
                    binders.append(self.ident().text)
                    while self.accept(","):
                        binders.append(self.ident().text)
                self.expect(")")
            self.expect("=>")
            body = []
            while not self.at("case", "}") and self.tok.kind != "eof":
                body.append(self.statement())
            cases.append(A.MatchCase(ctor, binders, body,
                                     span=self.span_from(cstart)))
        if braced:
            self.expect("}")
        if not cases:
            self.fail("match statement without cases", start.span)
        return A.Match(scrutinee, cases, span=self.span_from(start))

    # ------------------------------------------------------------ expressions

    def expr_list(self):
        items = [self.expr()]
        while self.accept(","):
            items.append(self.expr())
        return items

    def expr(self):
        return self.equiv()

    def equiv(self):
        start = self.tok
        left = self.implies()
        while self.at("<==>"):
            self.advance()
            right = self.implies()
            left = A.Binary("<==>", left, right, span=self.span_from(start))
        return left

    def implies(self):
        start = self.tok
        left = self.logical()
        if self.at("==>"):
            self.advance()
            right = self.implies()
            return A.Binary("==>", left, right, span=self.span_from(start))
        while self.at("<=="):
            self.advance()
            right = self.logical()
            left = A.Binary("<==", left, right, span=self.span_from(start))
        return left

    def logical(self):
        start = self.tok
        left = self.conj()
        while self.at("||"):
            self.advance()
            right = self.conj()
            left = A.Binary("||", left, right, span=self.span_from(start))
        return left

    def conj(self):
        start = self.tok
        left = self.relation()
        while self.at("&&"):
            self.advance()
            right = self.relation()
            left = A.Binary("&&", left, right, span=self.span_from(start))
        return left

    def relation(self):
        start = self.tok
        operands = [self.additive()]
        ops = []
        while self.at(*RELOPS):
            ops.append(self.advance().text)
            operands.append(self.additive())
        if not ops:
            return operands[0]
        span = self.span_from(start)
        links = []
        for i, op in enumerate(ops):
            lhs = operands[i] if i == 0 else copy.deepcopy(operands[i])
            links.append(A.Binary(op, lhs, operands[i + 1], span=span))
        result = links[0]
        for link in links[1:]:
            result = A.Binary("&&", result, link, span=span)
        return result

    def additive(self):
        start = self.tok
        left = self.multiplicative()
        while self.at("+", "-"):
            op = self.advance().text
            right = self.multiplicative()
            left = A.Binary(op, left, right, span=self.span_from(start))
        return left

    def multiplicative(self):
        start = self.tok
        left = self.unary()
        while self.at("*", "/", "%"):
            op = self.advance().text
            right = self.unary()
            left = A.Binary(op, left, right, span=self.span_from(start))
        return left

    def unary(self):
        start = self.tok
        if self.at("!", "-"):
            op = self.advance().text
            operand = self.unary()
            return A.Unary(op, operand, span=self.span_from(start))
        return self.postfix()

    def postfix(self):
        start = self.tok
        e = self.primary()
        while True:
            if self.accept("["):
                if self.accept(".."):
                    hi = None if self.at("]") else self.expr()
                    self.expect("]")
                    e = A.Slice(e, None, hi, span=self.span_from(start))
                    continue
                first = self.expr()
                if self.accept(".."):
                    hi = None if self.at("]") else self.expr()
                    self.expect("]")
                    e = A.Slice(e, first, hi, span=self.span_from(start))
                else:
                    self.expect("]")
                    e = A.Index(e, first, span=self.span_from(start))
            elif self.accept("."):
                name = self.ident().text
                if self.accept("?"):
                    e = A.IsCtor(e, name, span=self.span_from(start))
                elif name == "Length":
                    e = A.ArrayLength(e, span=self.span_from(start))
                else:
                    e = A.Destructor(e, name, span=self.span_from(start))
            else:
                return e

    def primary(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return A.IntLit(int(t.text), span=t.span)
        if self.accept("true"):
            return A.BoolLit(True, span=t.span)
        if self.accept("false"):
            return A.BoolLit(False, span=t.span)
        if self.accept("null"):
            return A.NullLit(span=t.span)
        if t.kind == "ident":
            self.advance()
            if self.accept("("):
                args = [] if self.at(")") else self.expr_list()
                self.expect(")")
                return A.FnCall(t.text, args, span=self.span_from(t))
            return A.Var(t.text, span=t.span)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.accept("old"):
            self.expect("(")
            e = self.expr()
            self.expect(")")
            return A.Old(e, span=self.span_from(t))
        if self.accept("multiset"):
            self.expect("(")
            e = self.expr()
            self.expect(")")
            return A.MultisetOf(e, span=self.span_from(t))
        if self.accept("if"):
            cond = self.expr()
            self.expect("then")
            then = self.expr()
            self.expect("else")
            els = self.expr()
            return A.IfExpr(cond, then, els, span=self.span_from(t))
        if self.at("forall", "exists"):
            kind = self.advance().text
            bvs = []
            while True:
                bstart = self.tok
                name = self.ident().text
                ty = self.type_ref() if self.accept(":") else None
                bvs.append(A.BoundVar(name, ty, span=self.span_from(bstart)))
                if not self.accept(","):
                    break
            self.expect("::")
            body = self.expr()
            return A.Quantifier(kind, bvs, body, span=self.span_from(t))
        self.fail(f"expected an expression but found {self.describe(t)}")


# ---------------------------------------------------------------- post-pass

def _classify_calls(program):
    """Turn ``x := M(a)`` into a Call statement when ``M`` names a method."""
    methods = {d.name for d in program.decls if isinstance(d, A.Method)}

    def fix(stmts):
        out = []
        for s in stmts:
            if (isinstance(s, A.Assign) and len(s.rhs) == 1
                    and isinstance(s.rhs[0], A.FnCall)
                    and s.rhs[0].name in methods):
                c = s.rhs[0]
                s = A.Call(s.lhs, c.name, c.args, span=s.span)
            elif (isinstance(s, A.VarDecl) and s.init is not None
                    and len(s.init) == 1 and isinstance(s.init[0], A.FnCall)
                    and s.init[0].name in methods):
                c = s.init[0]
                targets = [A.Var(n, span=s.span) for n in s.names]
                s = A.Call(targets, c.name, c.args, declare=True,
                           ghost=s.ghost, span=s.span)
            elif isinstance(s, A.If):
                s.then = fix(s.then)
                if s.els is not None:
                    s.els = fix(s.els)
            elif isinstance(s, A.While):
                s.body = fix(s.body)
            elif isinstance(s, A.Calc):
                s.hints = [fix(h) for h in s.hints]
            elif isinstance(s, A.Match):
                for c in s.cases:
                    c.body = fix(c.body)
            out.append(s)
        return out

    for d in program.decls:
        if isinstance(d, A.Method) and d.body is not None:
            d.body = fix(d.body)


def parse_or_diagnostics(text, file="<input>"):
    """Return ``(program, diagnostics)``; the program holds every declaration
    that parsed."""
    diags: list[Diagnostic] = []
    try:
        tokens = tokenize(text, file)
    except LexError as e:
        return A.Program([], file=file), [error(e.span, "syntax", str(e))]
    program = Parser(tokens, file).program(diags)
    _classify_calls(program)
    seen = {}
    for d in program.decls:
        if d.name in seen:
            diags.append(error(d.span, "duplicate",
                               f"duplicate declaration '{d.name}'"))
        seen[d.name] = d
    return program, diags


def parse(text, file="<input>"):
    """Parse ``text``; returns a Program, or the list of Diagnostics when the
    text has syntax errors."""
    program, diags = parse_or_diagnostics(text, file)
    if diags:
        return diags
    return program


def parse_expr(text, file="<expr>"):
    tokens = tokenize(text, file)
    p = Parser(tokens, file)
    e = p.expr()
    if p.tok.kind != "eof":
        raise ParseError(p.tok.span, f"unexpected {p.describe(p.tok)}")
    return e
