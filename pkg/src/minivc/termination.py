"""Termination metrics: guessing, and well-founded decrease formulas."""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import List, Optional

from minivc import logic as L
from minivc.resolve import (BoolType, DatatypeType, IntType, SeqType,
                            TypedProgram, prune)
from minivc.syntax import ast as A
from minivc.syntax.printer import expr_str


@dataclass
class Metric:
    components: List[object]     # AST expressions
    origin: str                  # "user-written" or "guessed"
    span: object = None

    def text(self):
        return ", ".join(expr_str(c) for c in self.components)


def _first_comparison(guard):
    if isinstance(guard, A.Binary):
        if guard.op in ("<", "<=", ">", ">=", "!="):
            return guard
        if guard.op == "&&":
            return _first_comparison(guard.left) or _first_comparison(guard.right)
    return None


def guess_metric(site, tp: TypedProgram = None) -> Optional[Metric]:
    """Dafny-style guess for a loop or a recursive declaration."""
    if isinstance(site, A.While):
        cmp = _first_comparison(site.guard)
        if cmp is None:
            return None
        a, b = copy.deepcopy(cmp.left), copy.deepcopy(cmp.right)
        if cmp.op in ("<", "<=", "!="):
            hi, lo = b, a
        else:
            hi, lo = a, b
        metric = A.Binary("-", hi, lo, span=cmp.span)
        if tp is not None:
            tp.types[id(metric)] = IntType()
        return Metric([metric], "guessed", site.span)
    params = site.ins if isinstance(site, A.Method) else getattr(site, "params", [])
    comps = []
    for p in params:
        t = p.type.name
        if t in ("int", "nat") or (tp is not None and isinstance(
                tp.signatures.get(t), A.Datatype)):
            v = A.Var(p.name, span=site.span)
            if tp is not None:
                info = tp.variables[site.name][p.name]
                tp.types[id(v)] = info.type
                tp.refs[id(v)] = info
            comps.append(v)
    if not comps:
        return None
    return Metric(comps, "guessed", site.span)


def metric_of(site, tp: TypedProgram = None) -> Optional[Metric]:
    """User-written decreases if present, otherwise the guess."""
    if site.decreases:
        span = site.decreases[0].span
        return Metric(list(site.decreases), "user-written", span)
    return guess_metric(site, tp)


# ---------------------------------------------------------------- orders

def _less(new, old, ty, order):
    """Strict well-founded order for one component, or None."""
    ty = prune(ty)
    if isinstance(ty, IntType):
        return L.And(L.mk("<", (new, old)), L.mk(">=", (old, L.IntVal(0))))
    if isinstance(ty, DatatypeType):
        return L.mk("<", (order.rank(new), order.rank(old)))
    if isinstance(ty, BoolType):
        return L.And(L.Not(new), old)
    if isinstance(ty, SeqType):
        return order.proper_prefix(new, old)
    return None


def lex_decrease(new, old, types, order=None):
    """Formula stating that tuple ``new`` is lexicographically below ``old``
    over their common prefix.  ``order`` supplies ``rank`` for datatype
    values and ``proper_prefix`` for sequences."""
    n = min(len(new), len(old))
    disjuncts = []
    prefix_eq = []
    for p in range(n):
        less = _less(new[p], old[p], types[p], order)
        if less is None:
            raise ValueError(f"no well-founded order for {types[p]}")
        disjuncts.append(L.conj(prefix_eq + [less]))
        prefix_eq.append(L.Eq(new[p], old[p]))
    return L.Or(*disjuncts) if disjuncts else L.FALSE


def decrease_goals(new, old, types, order=None):
    """Obligation goals ``[(kind, formula)]`` for one back-edge or call.

    A single integer component is split into its decrease and bounded parts;
    anything else yields one lexicographic decrease goal."""
    if len(new) == 1 and len(old) == 1 and isinstance(prune(types[0]), IntType):
        return [("decreases-decrease", L.mk("<", (new[0], old[0]))),
                ("decreases-bounded", L.mk(">=", (old[0], L.IntVal(0))))]
    return [("decreases-decrease", lex_decrease(new, old, types, order))]


def decrease_obligations(site, new, old, types, hypotheses, decl, order=None,
                         theory=None):
    from minivc.vcgen import LABELS, Obligation
    out = []
    span = site.span
    for kind, goal in decrease_goals(new, old, types, order):
        out.append(Obligation(goal, list(hypotheses), kind, span, LABELS[kind],
                              decl, theory=theory))
    return out


def brute_force_lex_less(new, old):
    """Reference comparator for integer tuples (used by property tests)."""
    n = min(len(new), len(old))
    for p in range(n):
        if new[p] != old[p]:
            return new[p] < old[p] and old[p] >= 0
    return False


def loop_sites(stmts):
    for s in stmts:
        if isinstance(s, A.While):
            yield s
            yield from loop_sites(s.body)
        elif isinstance(s, A.If):
            yield from loop_sites(s.then)
            if s.els:
                yield from loop_sites(s.els)
        elif isinstance(s, A.Match):
            for c in s.cases:
                yield from loop_sites(c.body)
        elif isinstance(s, A.Calc):
            for h in s.hints:
                yield from loop_sites(h)
        elif isinstance(s, A.Block):
            yield from loop_sites(s.stmts)


def report_metrics(tp: TypedProgram):
    """All termination sites with their metric, for ``--show-decreases``.

    Returns ``[(decl name, span, metric text or None, origin)]``."""
    out = []
    for d in tp.program.decls:
        if isinstance(d, A.Datatype):
            continue
        if tp.is_recursive(d.name):
            m = metric_of(d, tp)
            out.append((d.name, d.span, m.text() if m else None,
                        m.origin if m else "guessed"))
        body = d.body if isinstance(d, A.Method) else None
        for w in loop_sites(body or []):
            m = metric_of(w, tp)
            out.append((d.name, w.span, m.text() if m else None,
                        m.origin if m else "guessed"))
    return out
