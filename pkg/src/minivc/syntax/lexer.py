from __future__ import annotations

import re
from dataclasses import dataclass

from minivc.syntax.ast import SourceSpan

KEYWORDS = {
    "method", "function", "predicate", "lemma", "datatype", "ghost",
    "returns", "requires", "ensures", "modifies", "reads", "decreases",
    "invariant", "var", "if", "then", "else", "while", "assert", "assume",
    "calc", "match", "case", "forall", "exists", "old", "multiset", "new",
    "true", "false", "null", "int", "bool", "array", "seq",
}

# longest first so that the alternation picks ``<==>`` over ``<==`` over ``<=``
SYMBOLS = [
    "<==>", "==>", "<==", "::", ":=", "..", "==", "!=", "<=", ">=", "&&",
    "||", "=>", "<", ">", "+", "-", "*", "/", "%", "!", "(", ")", "{", "}",
    "[", "]", ",", ";", ":", ".", "|", "=", "?",
]

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)"
    r"|(?P<nl>\n)"
    r"|(?P<comment>//[^\n]*)"
    r"|(?P<num>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<sym>" + "|".join(re.escape(s) for s in SYMBOLS) + r")"
)


@dataclass
class Token:
    kind: str      # "ident", "num", "kw", "sym", "eof"
    text: str
    span: SourceSpan

    def __repr__(self):
        return f"Token({self.kind},{self.text!r}@{self.span.line}:{self.span.col})"


class LexError(Exception):
    def __init__(self, span, message):
        super().__init__(message)
        self.span = span


def tokenize(text, file="<input>"):
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            span = SourceSpan(file, line, pos - line_start + 1, 1)
            raise LexError(span, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        lexeme = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("num", "ident", "sym"):
            span = SourceSpan(file, line, pos - line_start + 1, len(lexeme))
            if kind == "ident" and lexeme in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, lexeme, span))
        pos = m.end()
    tokens.append(Token("eof", "", SourceSpan(file, line,
                                              pos - line_start + 1, 0)))
    return tokens
