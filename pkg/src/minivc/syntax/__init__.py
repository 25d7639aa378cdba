from minivc.syntax import ast
from minivc.syntax.ast import Program, SourceSpan
from minivc.syntax.parser import parse, parse_expr, parse_or_diagnostics
from minivc.syntax.printer import pretty_print

__all__ = ["ast", "Program", "SourceSpan", "parse", "parse_expr",
           "parse_or_diagnostics", "pretty_print"]
