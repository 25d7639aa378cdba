"""Pretty printer; output re-parses to a structurally equal tree."""

from __future__ import annotations

from minivc.syntax import ast as A

_LEVEL = {
    "<==>": 1, "==>": 2, "<==": 2, "||": 3, "&&": 4,
    "==": 5, "!=": 5, "<": 5, "<=": 5, ">": 5, ">=": 5,
    "+": 6, "-": 6, "*": 7, "/": 7, "%": 7,
}
UNARY_LEVEL = 8
POSTFIX_LEVEL = 9
ATOM_LEVEL = 10
INDENT = "  "


def level(e):
    if isinstance(e, A.Binary):
        return _LEVEL[e.op]
    if isinstance(e, A.Unary):
        return UNARY_LEVEL
    if isinstance(e, (A.Quantifier, A.IfExpr)):
        return 0
    if isinstance(e, (A.Index, A.Slice, A.ArrayLength, A.Destructor,
                      A.IsCtor)):
        return POSTFIX_LEVEL
    if isinstance(e, A.IntLit) and e.value < 0:
        return UNARY_LEVEL
    return ATOM_LEVEL


def _paren(s):
    return f"({s})"


def _binary(e):
    lvl = _LEVEL[e.op]
    left, right = expr_str(e.left), expr_str(e.right)
    ll, rl = level(e.left), level(e.right)
    if lvl == 5:
        # relational operators do not associate; a nested one would chain
        left_ok, right_ok = ll > 5, rl > 5
    elif e.op == "==>":
        left_ok = ll > lvl
        right_ok = rl > lvl or (isinstance(e.right, A.Binary)
                                and e.right.op == "==>")
    elif e.op == "||":
        left_ok = ll > 4 or (isinstance(e.left, A.Binary) and e.left.op == "||")
        right_ok = rl > 4
    else:
        left_ok = ll > lvl or (ll == lvl and e.left.op == e.op) or (
            ll == lvl and e.op in "+-" and e.left.op in "+-") or (
            ll == lvl and e.op in "*/%" and e.left.op in "*/%")
        right_ok = rl > lvl
    if not left_ok:
        left = _paren(left)
    if not right_ok:
        right = _paren(right)
    return f"{left} {e.op} {right}"


def expr_str(e) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.NullLit):
        return "null"
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.Binary):
        return _binary(e)
    if isinstance(e, A.Unary):
        inner = expr_str(e.operand)
        if level(e.operand) < UNARY_LEVEL:
            inner = _paren(inner)
        return f"{e.op}{inner}"
    if isinstance(e, A.FnCall):
        return f"{e.name}({', '.join(expr_str(a) for a in e.args)})"
    if isinstance(e, (A.Index, A.Slice, A.ArrayLength, A.Destructor,
                      A.IsCtor)):
        base = expr_str(e.base)
        if level(e.base) < POSTFIX_LEVEL:
            base = _paren(base)
        if isinstance(e, A.Index):
            return f"{base}[{expr_str(e.index)}]"
        if isinstance(e, A.Slice):
            lo = "" if e.lo is None else expr_str(e.lo)
            hi = "" if e.hi is None else expr_str(e.hi)
            return f"{base}[{lo}..{hi}]"
        if isinstance(e, A.ArrayLength):
            return f"{base}.Length"
        if isinstance(e, A.Destructor):
            return f"{base}.{e.name}"
        return f"{base}.{e.ctor}?"
    if isinstance(e, A.MultisetOf):
        return f"multiset({expr_str(e.arg)})"
    if isinstance(e, A.Old):
        return f"old({expr_str(e.expr)})"
    if isinstance(e, A.IfExpr):
        return (f"if {expr_str(e.cond)} then {expr_str(e.then)} "
                f"else {expr_str(e.els)}")
    if isinstance(e, A.Quantifier):
        bvs = ", ".join(b.name if b.type is None else f"{b.name}: {type_str(b.type)}"
                        for b in e.vars)
        return f"{e.kind} {bvs} :: {expr_str(e.body)}"
    raise TypeError(f"not an expression: {e!r}")


def _operand(e):
    # quantifiers and if-expressions extend to the right; wrap when nested
    s = expr_str(e)
    return _paren(s) if level(e) == 0 else s


def type_str(t: A.TypeRef) -> str:
    if t.args:
        return f"{t.name}<{', '.join(type_str(a) for a in t.args)}>"
    return t.name


def _params(ps):
    return ", ".join(("ghost " if p.ghost else "") + f"{p.name}: {type_str(p.type)}"
                     for p in ps)


def _block(stmts, depth):
    if not stmts:
        return "{\n" + INDENT * depth + "}"
    inner = "\n".join(stmt_str(s, depth + 1) for s in stmts)
    return "{\n" + inner + "\n" + INDENT * depth + "}"


def stmt_str(s, depth=0) -> str:
    pad = INDENT * depth
    if isinstance(s, A.VarDecl):
        names = ", ".join(n if t is None else f"{n}: {type_str(t)}"
                          for n, t in zip(s.names, s.types))
        kw = "ghost var" if s.ghost else "var"
        if s.init is None:
            return f"{pad}{kw} {names};"
        return f"{pad}{kw} {names} := {', '.join(expr_str(e) for e in s.init)};"
    if isinstance(s, A.Assign):
        return (f"{pad}{', '.join(expr_str(e) for e in s.lhs)} := "
                f"{', '.join(expr_str(e) for e in s.rhs)};")
    if isinstance(s, A.ArrayAlloc):
        kw = ("ghost var " if s.ghost else "var ") if s.declare else ""
        return (f"{pad}{kw}{expr_str(s.target)} := new {type_str(s.elem_type)}"
                f"[{expr_str(s.length)}];")
    if isinstance(s, A.Call):
        call = f"{s.callee}({', '.join(expr_str(a) for a in s.args)})"
        if not s.targets:
            return f"{pad}{call};"
        kw = ("ghost var " if s.ghost else "var ") if s.declare else ""
        return f"{pad}{kw}{', '.join(expr_str(t) for t in s.targets)} := {call};"
    if isinstance(s, A.If):
        out = f"{pad}if {expr_str(s.cond)} {_block(s.then, depth)}"
        if s.els is not None:
            if len(s.els) == 1 and isinstance(s.els[0], A.If):
                out += " else " + stmt_str(s.els[0], depth).lstrip()
            else:
                out += " else " + _block(s.els, depth)
        return out
    if isinstance(s, A.While):
        lines = [f"{pad}while {expr_str(s.guard)}"]
        for inv in s.invariants:
            lines.append(f"{pad}{INDENT}invariant {expr_str(inv)}")
        if s.decreases is not None:
            lines.append(f"{pad}{INDENT}decreases "
                         f"{', '.join(expr_str(d) for d in s.decreases)}")
        lines.append(pad + _block(s.body, depth))
        return "\n".join(lines)
    if isinstance(s, A.Assert):
        return f"{pad}assert {expr_str(s.expr)};"
    if isinstance(s, A.Assume):
        return f"{pad}assume {expr_str(s.expr)};"
    if isinstance(s, A.Calc):
        lines = [f"{pad}calc {{"]
        inner = pad + INDENT
        if s.lines:
            lines.append(f"{inner}{expr_str(s.lines[0])};")
        for op, hint, line in zip(s.ops, s.hints, s.lines[1:]):
            if hint:
                lines.append(f"{inner}{op} {_block(hint, depth + 1)}")
            else:
                lines.append(f"{inner}{op}")
            lines.append(f"{inner}{expr_str(line)};")
        lines.append(f"{pad}}}")
        return "\n".join(lines)
    if isinstance(s, A.Match):
        lines = [f"{pad}match {expr_str(s.scrutinee)} {{"]
        for c in s.cases:
            pat = c.ctor + (f"({', '.join(c.binders)})" if c.binders else "")
            lines.append(f"{pad}{INDENT}case {pat} =>")
            for b in c.body:
                lines.append(stmt_str(b, depth + 2))
        lines.append(f"{pad}}}")
        return "\n".join(lines)
    if isinstance(s, A.Block):
        return pad + _block(s.stmts, depth)
    raise TypeError(f"not a statement: {s!r}")


def _clauses(kw, items, pad):
    return [f"{pad}{kw} {expr_str(e)}" for e in items]


def decl_str(d) -> str:
    pad = INDENT
    if isinstance(d, A.Datatype):
        tps = f"<{', '.join(d.type_params)}>" if d.type_params else ""
        ctors = " | ".join(c.name + (f"({_params(c.fields)})" if c.fields else "")
                           for c in d.ctors)
        return f"datatype {d.name}{tps} = {ctors}"
    tps = f"<{', '.join(d.type_params)}>" if d.type_params else ""
    if isinstance(d, A.Method):
        kw = "lemma" if d.is_lemma else ("ghost method" if d.is_ghost else "method")
        head = f"{kw} {d.name}{tps}({_params(d.ins)})"
        if d.outs:
            head += f" returns ({_params(d.outs)})"
        lines = [head]
        lines += _clauses("requires", d.requires, pad)
        if d.modifies:
            lines.append(f"{pad}modifies {', '.join(expr_str(e) for e in d.modifies)}")
        lines += _clauses("ensures", d.ensures, pad)
        if d.decreases is not None:
            lines.append(f"{pad}decreases {', '.join(expr_str(e) for e in d.decreases)}")
        if d.body is not None:
            lines.append(_block(d.body, 0))
        return "\n".join(lines)
    if isinstance(d, A.Function):
        if d.is_predicate:
            kw = "predicate method" if d.is_compiled else "predicate"
            head = f"{kw} {d.name}{tps}({_params(d.params)})"
        else:
            kw = "function method" if d.is_compiled else "function"
            head = (f"{kw} {d.name}{tps}({_params(d.params)}): "
                    f"{type_str(d.result_type)}")
        lines = [head]
        lines += _clauses("requires", d.requires, pad)
        if d.reads:
            lines.append(f"{pad}reads {', '.join(expr_str(e) for e in d.reads)}")
        if d.decreases is not None:
            lines.append(f"{pad}decreases {', '.join(expr_str(e) for e in d.decreases)}")
        if d.body is not None:
            lines.append("{")
            lines.append(f"{pad}{expr_str(d.body)}")
            lines.append("}")
        return "\n".join(lines)
    raise TypeError(f"not a declaration: {d!r}")


def pretty_print(node) -> str:
    """Render any AST node (program, declaration, statement, expression or
    type) as source text."""
    if isinstance(node, A.Program):
        return "\n\n".join(decl_str(d) for d in node.decls) + (
            "\n" if node.decls else "")
    if isinstance(node, (A.Method, A.Function, A.Datatype)):
        return decl_str(node)
    if isinstance(node, A.TypeRef):
        return type_str(node)
    if isinstance(node, list):
        return "\n".join(stmt_str(s) for s in node)
    try:
        return expr_str(node)
    except TypeError:
        return stmt_str(node)
