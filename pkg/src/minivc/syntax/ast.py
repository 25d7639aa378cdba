"""AST node classes for the annotated language.

Every node carries a ``span``; spans are excluded from equality so two
parses of the same text (or a parse of a pretty-printed tree) compare
equal structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Union


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    col: int
    length: int = 0

    def __post_init__(self):
        if self.line < 1 or self.col < 1 or self.length < 0:
            raise ValueError(f"bad span {self.line}:{self.col}+{self.length}")

    def __str__(self):
        return f"{self.file}:{self.line}:{self.col}"


NOSPAN = SourceSpan("<builtin>", 1, 1, 0)


def _span():
    return field(default=NOSPAN, compare=False, repr=False)


# ---------------------------------------------------------------- types

@dataclass
class TypeRef:
    """Written type, e.g. ``int``, ``array<int>``, ``List<T>``."""
    name: str
    args: List["TypeRef"] = field(default_factory=list)
    span: SourceSpan = _span()


# ---------------------------------------------------------------- expressions

@dataclass
class IntLit:
    value: int
    span: SourceSpan = _span()


@dataclass
class BoolLit:
    value: bool
    span: SourceSpan = _span()


@dataclass
class NullLit:
    span: SourceSpan = _span()


@dataclass
class Var:
    name: str
    span: SourceSpan = _span()


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    span: SourceSpan = _span()


@dataclass
class Unary:
    op: str          # "!" or "-"
    operand: "Expr"
    span: SourceSpan = _span()


@dataclass
class FnCall:
    """Call of a function, predicate or datatype constructor."""
    name: str
    args: List["Expr"]
    span: SourceSpan = _span()


@dataclass
class Index:
    base: "Expr"
    index: "Expr"
    span: SourceSpan = _span()


@dataclass
class ArrayLength:
    base: "Expr"
    span: SourceSpan = _span()


@dataclass
class Slice:
    """``a[..]``, ``a[lo..]``, ``a[..hi]`` or ``a[lo..hi]``."""
    base: "Expr"
    lo: Optional["Expr"]
    hi: Optional["Expr"]
    span: SourceSpan = _span()


@dataclass
class MultisetOf:
    arg: "Expr"
    span: SourceSpan = _span()


@dataclass
class Old:
    expr: "Expr"
    span: SourceSpan = _span()


@dataclass
class BoundVar:
    name: str
    type: Optional[TypeRef] = None
    span: SourceSpan = _span()


@dataclass
class Quantifier:
    kind: str        # "forall" | "exists"
    vars: List[BoundVar]
    body: "Expr"
    span: SourceSpan = _span()


@dataclass
class Destructor:
    """Field access on a datatype value, e.g. ``xs.tail``."""
    base: "Expr"
    name: str
    span: SourceSpan = _span()


@dataclass
class IsCtor:
    """Discriminator ``xs.Nil?``."""
    base: "Expr"
    ctor: str
    span: SourceSpan = _span()


@dataclass
class IfExpr:
    cond: "Expr"
    then: "Expr"
    els: "Expr"
    span: SourceSpan = _span()


Expr = Union[IntLit, BoolLit, NullLit, Var, Binary, Unary, FnCall, Index,
             ArrayLength, Slice, MultisetOf, Old, Quantifier, Destructor,
             IsCtor, IfExpr]


# ---------------------------------------------------------------- statements

@dataclass
class VarDecl:
    names: List[str]
    types: List[Optional[TypeRef]]
    ghost: bool
    init: Optional[List["Expr"]]
    span: SourceSpan = _span()


@dataclass
class Assign:
    lhs: List["Expr"]            # Var or Index
    rhs: List["Expr"]
    span: SourceSpan = _span()


@dataclass
class ArrayAlloc:
    target: "Expr"
    elem_type: TypeRef
    length: "Expr"
    declare: bool = False        # ``var a := new T[n];``
    ghost: bool = False
    span: SourceSpan = _span()


@dataclass
class If:
    cond: "Expr"
    then: List["Stmt"]
    els: Optional[List["Stmt"]]  # a nested ``else if`` is a one-element list
    span: SourceSpan = _span()


@dataclass
class While:
    guard: "Expr"
    invariants: List["Expr"]
    decreases: Optional[List["Expr"]]
    body: List["Stmt"]
    span: SourceSpan = _span()


@dataclass
class Call:
    targets: List["Expr"]
    callee: str
    args: List["Expr"]
    declare: bool = False        # ``var r := M(x);``
    ghost: bool = False
    span: SourceSpan = _span()


@dataclass
class Assert:
    expr: "Expr"
    origin: str = field(default="user", compare=False, repr=False)
    span: SourceSpan = _span()


@dataclass
class Assume:
    expr: "Expr"
    origin: str = field(default="user", compare=False, repr=False)
    span: SourceSpan = _span()


@dataclass
class Calc:
    lines: List["Expr"]
    ops: List[str]
    hints: List[List["Stmt"]]
    op_spans: List[SourceSpan] = field(default_factory=list, compare=False,
                                       repr=False)
    span: SourceSpan = _span()


@dataclass
class MatchCase:
    ctor: str
    binders: List[str]
    body: List["Stmt"]
    span: SourceSpan = _span()


@dataclass
class Match:
    scrutinee: "Expr"
    cases: List[MatchCase]
    span: SourceSpan = _span()


@dataclass
class Block:
    """Statement group whose obligations do not flow to the statements after
    it.  Produced by calc desugaring only; never parsed."""
    stmts: List["Stmt"]
    span: SourceSpan = _span()


Stmt = Union[VarDecl, Assign, ArrayAlloc, If, While, Call, Assert, Assume,
             Calc, Match, Block]


# ---------------------------------------------------------------- declarations

@dataclass
class Param:
    name: str
    type: TypeRef
    ghost: bool = False
    span: SourceSpan = _span()


@dataclass
class Method:
    name: str
    type_params: List[str]
    ins: List[Param]
    outs: List[Param]
    requires: List["Expr"]
    ensures: List["Expr"]
    modifies: List["Expr"]
    decreases: Optional[List["Expr"]]
    body: Optional[List["Stmt"]]
    is_lemma: bool = False
    is_ghost: bool = False
    span: SourceSpan = _span()

    @property
    def ghostly(self):
        return self.is_lemma or self.is_ghost


@dataclass
class Function:
    name: str
    type_params: List[str]
    params: List[Param]
    result_type: TypeRef
    requires: List["Expr"]
    reads: List["Expr"]
    decreases: Optional[List["Expr"]]
    body: Optional["Expr"]
    is_predicate: bool = False
    is_compiled: bool = False
    span: SourceSpan = _span()


@dataclass
class Constructor:
    name: str
    fields: List[Param]
    span: SourceSpan = _span()


@dataclass
class Datatype:
    name: str
    type_params: List[str]
    ctors: List[Constructor]
    span: SourceSpan = _span()


Declaration = Union[Method, Function, Datatype]


@dataclass
class Program:
    decls: List[Declaration]
    file: str = field(default="<input>", compare=False, repr=False)

    def find(self, name):
        for d in self.decls:
            if d.name == name:
                return d
        return None
