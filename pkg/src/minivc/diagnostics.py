from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Optional

if TYPE_CHECKING:
    from minivc.syntax.ast import SourceSpan

SEVERITIES = ("error", "warning", "info")


@dataclass
class Diagnostic:
    span: "SourceSpan"
    severity: str
    kind: str
    message: str
    label: Optional[str] = None
    model: Optional[Dict[str, object]] = None

    def sort_key(self):
        return (self.span.file, self.span.line, self.span.col, self.kind,
                self.message)

    def format(self):
        if self.span is None:
            return f"{self.severity}: {self.kind}: {self.message}"
        return (f"{self.span.file}:{self.span.line}:{self.span.col}: "
                f"{self.severity}: {self.kind}: {self.message}")

    def to_json(self):
        out = {"file": self.span.file, "line": self.span.line,
               "col": self.span.col, "severity": self.severity,
               "kind": self.kind, "message": self.message}
        if self.label is not None:
            out["label"] = self.label
        if self.model:
            out["model"] = {k: _jsonable(v) for k, v in self.model.items()}
        return out


def _jsonable(v):
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    return str(v)


class DiagnosticError(Exception):
    """Raised by front-end passes carrying the collected diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(d.format() for d in self.diagnostics))


def error(span, kind, message, **kw):
    return Diagnostic(span, "error", kind, message, **kw)
