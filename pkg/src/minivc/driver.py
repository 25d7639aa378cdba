"""Orchestration: parse, resolve, generate obligations, solve, report."""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from minivc import smt, termination, vcgen
from minivc.diagnostics import Diagnostic, error
from minivc.resolve import front_end
from minivc.syntax import ast as A
from minivc.syntax.parser import parse_or_diagnostics

SCHEMA = 1

EXIT_VERIFIED = 0
EXIT_FAILED = 1
EXIT_FRONT_END = 2
EXIT_ENVIRONMENT = 3

ASSUMED_LEMMA = "lemma assumed, not proved"
ASSUME_LEFT = "assume statement remains; the proof is incomplete"


@dataclass
class Options:
    fuel: int = 2
    timeout: float = 10.0
    workers: int = 0                 # 0 means one per CPU
    solver_path: Optional[str] = None
    show_decreases: bool = False
    dump_smt: Optional[str] = None


@dataclass
class DeclReport:
    name: str
    total: int = 0
    proved: int = 0
    failed: int = 0
    unknown: int = 0
    assumed_lemma: bool = False
    metrics: List[dict] = field(default_factory=list)
    wall_time: float = 0.0

    def to_json(self):
        return {"name": self.name, "obligations": self.total, "proved": self.proved,
                "failed": self.failed, "unknown": self.unknown,
                "assumed_lemma": self.assumed_lemma, "metrics": self.metrics,
                "wall_time": round(self.wall_time, 3)}


@dataclass
class ObligationResult:
    decl: str
    kind: str
    line: int
    col: int
    status: str
    wall_time: float
    model: Optional[Dict[str, object]] = None

    def to_json(self):
        out = {"decl": self.decl, "kind": self.kind, "line": self.line,
               "col": self.col, "status": self.status,
               "wall_time": round(self.wall_time, 3)}
        if self.model:
            out["model"] = {k: v if isinstance(v, (int, bool)) else str(v)
                            for k, v in self.model.items()}
        return out


@dataclass
class VerificationReport:
    file: str
    verdict: str = "verified"        # verified | incomplete | failed | front-end | environment
    exit_code: int = EXIT_VERIFIED
    declarations: List[DeclReport] = field(default_factory=list)
    obligations: List[ObligationResult] = field(default_factory=list)
    diagnostics: List[Diagnostic] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def errors(self):
        return [d for d in self.diagnostics if d.severity == "error"]

    @property
    def warnings(self):
        return [d for d in self.diagnostics if d.severity == "warning"]

    def counts(self):
        out = {"total": 0, "proved": 0, "failed": 0, "unknown": 0}
        for d in self.declarations:
            out["total"] += d.total
            out["proved"] += d.proved
            out["failed"] += d.failed
            out["unknown"] += d.unknown
        return out

    def to_json(self):
        return {"schema": SCHEMA, "file": self.file, "verdict": self.verdict,
                "exit_code": self.exit_code, "summary": self.counts(),
                "declarations": [d.to_json() for d in self.declarations],
                "obligations": [o.to_json() for o in self.obligations],
                "diagnostics": [d.to_json() for d in self.diagnostics],
                "wall_time": round(self.wall_time, 3)}


def _user_assumes(stmts):
    for s in vcgen._walk_stmts(stmts or []):
        if isinstance(s, A.Assume) and s.origin == "user":
            yield s


def _failure_message(ob, verdict):
    if verdict.status == "refuted":
        return ob.label
    if verdict.status == "timeout":
        return f"{ob.label} (solver timed out)"
    if verdict.status == "solver-error":
        return f"{ob.label} (solver error: {verdict.text})"
    if verdict.candidate is not None:
        return f"{ob.label} (not proved; candidate countermodel)"
    return f"{ob.label} (not proved; try adding an assert or lemma)"


def verify_text(text: str, file: str = "<input>", options: Options = None
                ) -> VerificationReport:
    options = options or Options()
    t0 = time.perf_counter()
    report = VerificationReport(file)
    program, diags = parse_or_diagnostics(text, file)
    tp = None
    if not diags:
        tp, diags = front_end(program)
    if diags or tp is None:
        report.diagnostics = sorted(diags, key=Diagnostic.sort_key)
        report.verdict, report.exit_code = "front-end", EXIT_FRONT_END
        report.wall_time = time.perf_counter() - t0
        return report

    theory = vcgen.Theory(tp)
    decl_reports: Dict[str, DeclReport] = {}
    jobs = []
    out_diags: List[Diagnostic] = []
    metrics = termination.report_metrics(tp)
    for d in program.decls:
        if isinstance(d, A.Datatype):
            continue
        dr = DeclReport(d.name)
        decl_reports[d.name] = dr
        for name, span, text_, origin in metrics:
            if name == d.name:
                dr.metrics.append({"line": span.line, "col": span.col,
                                   "metric": text_, "origin": origin})
                if options.show_decreases:
                    shown = text_ if text_ is not None else \
                        "none (no metric guessed proves termination)"
                    out_diags.append(Diagnostic(span, "info", "decreases",
                                                f"decreases {shown} ({origin})"))
        if isinstance(d, A.Method) and d.is_lemma and d.body is None:
            dr.assumed_lemma = True
            out_diags.append(Diagnostic(d.span, "warning", "assumed-lemma",
                                        ASSUMED_LEMMA))
        if isinstance(d, A.Method):
            for s in _user_assumes(d.body):
                out_diags.append(Diagnostic(s.span, "warning", "assume", ASSUME_LEFT))
        t1 = time.perf_counter()
        try:
            obs = vcgen.vc_declaration(d, tp, options.fuel, theory)
        except vcgen.Unsupported as exc:
            out_diags.append(error(d.span, "unsupported",
                                   f"construct outside the supported fragment: {exc}"))
            obs = []
        dr.wall_time += time.perf_counter() - t1
        counter: Dict[str, int] = {}
        for ob in obs:
            k = counter.get(ob.kind, 0)
            counter[ob.kind] = k + 1
            jobs.append((dr, ob, k))

    try:
        smt.find_solver(options.solver_path)
    except smt.SolverConfigError as exc:
        report.diagnostics = [Diagnostic(A.SourceSpan(file, 1, 1), "error",
                                         "solver", str(exc))]
        report.verdict, report.exit_code = "environment", EXIT_ENVIRONMENT
        return report

    def solve(job):
        dr, ob, k = job
        path = None
        if options.dump_smt:
            path = os.path.join(options.dump_smt, f"{ob.decl}.{ob.kind}.{k}.smt2")

        def dump(script):
            with open(path, "w") as fh:
                fh.write(script.text)
        return smt.check(ob, options.fuel, options.timeout, options.solver_path,
                         dump if path else None)

    if options.dump_smt:
        os.makedirs(options.dump_smt, exist_ok=True)
    workers = options.workers or os.cpu_count() or 1
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            verdicts = list(pool.map(solve, jobs))
    else:
        verdicts = [solve(j) for j in jobs]

    for (dr, ob, _), v in zip(jobs, verdicts):
        dr.total += 1
        dr.wall_time += v.wall_time
        report.obligations.append(ObligationResult(
            ob.decl, ob.kind, ob.span.line, ob.span.col, v.status, v.wall_time,
            v.model))
        if v.status == "proved":
            dr.proved += 1
            continue
        if v.status == "refuted":
            dr.failed += 1
        else:
            dr.unknown += 1
        out_diags.append(Diagnostic(ob.span, "error", ob.kind,
                                    _failure_message(ob, v), label=ob.label,
                                    model=v.model))

    report.declarations = list(decl_reports.values())
    report.diagnostics = sorted(out_diags, key=Diagnostic.sort_key)
    if report.errors:
        report.verdict, report.exit_code = "failed", EXIT_FAILED
    elif report.warnings:
        report.verdict, report.exit_code = "incomplete", EXIT_FAILED
    report.wall_time = time.perf_counter() - t0
    return report


def verify_file(path, options: Options = None) -> VerificationReport:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        r = VerificationReport(str(path), "environment", EXIT_ENVIRONMENT)
        r.diagnostics = [Diagnostic(A.SourceSpan(str(path), 1, 1), "error", "io",
                                    str(exc))]
        return r
    return verify_text(text, os.path.basename(str(path)), options)


# ---------------------------------------------------------------- corpus

@dataclass
class CorpusEntry:
    file: str
    expect: str                      # verified | error | incomplete | front-end
    diagnostics: List[dict] = field(default_factory=list)   # {kind, line}
    note: str = ""


@dataclass
class CorpusResult:
    entry: CorpusEntry
    passed: bool
    report: Optional[VerificationReport]
    reason: str = ""


def load_manifest(path) -> List[CorpusEntry]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("//"):
                continue
            obj = json.loads(line)
            expected = obj.get("diagnostics")
            if expected is None and "kind" in obj:
                expected = [{"kind": obj["kind"], "line": obj.get("line")}]
            entries.append(CorpusEntry(obj["file"], obj["expect"], expected or [],
                                       obj.get("note", "")))
    return entries


_EXPECTED_EXIT = {"verified": EXIT_VERIFIED, "error": EXIT_FAILED,
                  "incomplete": EXIT_FAILED, "front-end": EXIT_FRONT_END}


def check_entry(entry: CorpusEntry, report: VerificationReport) -> CorpusResult:
    want = _EXPECTED_EXIT.get(entry.expect)
    if want is None:
        return CorpusResult(entry, False, report, f"unknown expectation {entry.expect}")
    if report.exit_code != want:
        got = [f"{d.kind}@{d.span.line}" for d in report.errors]
        return CorpusResult(entry, False, report,
                            f"exit {report.exit_code}, expected {want}; errors: {got}")
    if entry.expect == "incomplete" and report.errors:
        return CorpusResult(entry, False, report, "errors in an incomplete proof")
    for exp in entry.diagnostics:
        hit = any(d.kind == exp["kind"] and (exp.get("line") is None
                                             or d.span.line == exp["line"])
                  for d in report.diagnostics)
        if not hit:
            got = [f"{d.kind}@{d.span.line}" for d in report.diagnostics]
            return CorpusResult(entry, False, report,
                                f"missing {exp['kind']}@{exp.get('line')}; got {got}")
    return CorpusResult(entry, True, report)


def run_corpus(directory, manifest, options: Options = None) -> List[CorpusResult]:
    entries = load_manifest(manifest)
    listed = {e.file for e in entries}
    results = []
    for e in entries:
        path = os.path.join(directory, e.file)
        if not os.path.exists(path):
            results.append(CorpusResult(e, False, None, "file missing"))
            continue
        results.append(check_entry(e, verify_file(path, options)))
    for name in sorted(os.listdir(directory)):
        if name.endswith(".dfy") and name not in listed:
            results.append(CorpusResult(CorpusEntry(name, "?"), False, None,
                                        "file not in manifest"))
    return results


def corpus_dir():
    return os.path.join(os.path.dirname(__file__), "corpus")


def corpus_manifest():
    return os.path.join(corpus_dir(), "manifest.jsonl")
