"""Command-line interface: ``minivc verify | run | corpus``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from minivc import driver, interp
from minivc.interp import ArrayRef


def _options(ns) -> driver.Options:
    return driver.Options(fuel=ns.fuel, timeout=ns.timeout, workers=ns.workers,
                          solver_path=ns.solver_path,
                          show_decreases=getattr(ns, "show_decreases", False),
                          dump_smt=getattr(ns, "dump_smt", None))


def _add_solver_flags(p):
    p.add_argument("--fuel", type=int, default=2)
    p.add_argument("--timeout", type=float, default=10.0, help="seconds per obligation")
    p.add_argument("--workers", type=int, default=0, help="0 = one per CPU")
    p.add_argument("--solver-path", default=None)


def cmd_verify(ns):
    report = driver.verify_file(ns.file, _options(ns))
    for d in report.diagnostics:
        if d.severity != "info":
            print(d.format(), file=sys.stderr)
            if d.model:
                vals = ", ".join(f"{k} = {v}" for k, v in d.model.items())
                print(f"  counterexample: {vals}", file=sys.stderr)
    if ns.show_decreases:
        for d in report.diagnostics:
            if d.severity == "info":
                print(d.format())
    if ns.json:
        print(json.dumps(report.to_json(), indent=2))
    elif not ns.show_decreases:
        c = report.counts()
        print(f"{report.file}: {report.verdict} ({c['proved']}/{c['total']} "
              f"obligations proved)")
    return report.exit_code


def _parse_arg(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise SystemExit(f"cannot parse argument {text!r}; use JSON syntax "
                         f"(e.g. 5, true, [3,1,2])")


def _show(v):
    if isinstance(v, ArrayRef):
        return json.dumps(v.cells)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "null"
    return str(v)


def cmd_run(ns):
    from minivc.resolve import front_end
    from minivc.syntax.parser import parse_or_diagnostics
    try:
        with open(ns.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return driver.EXIT_ENVIRONMENT
    program, diags = parse_or_diagnostics(text, os.path.basename(ns.file))
    tp = None
    if not diags:
        tp, diags = front_end(program)
    if diags or tp is None:
        for d in diags:
            print(d.format(), file=sys.stderr)
        return driver.EXIT_FRONT_END
    decl = tp.signatures.get(ns.method)
    if decl is None:
        print(f"error: no method named '{ns.method}'", file=sys.stderr)
        return driver.EXIT_FRONT_END
    args = [_parse_arg(a) for a in ns.args]
    try:
        if hasattr(decl, "ins"):
            outs = interp.run_method(tp, decl, args, check_contracts=not ns.no_check,
                                     budget=ns.budget)
        else:
            outs = [interp.call_function(tp, decl, args, budget=ns.budget)]
    except interp.RuntimeFault as exc:
        print(f"{exc.span.file}:{exc.span.line}:{exc.span.col}: runtime fault: "
              f"{exc.kind}: {exc.message}", file=sys.stderr)
        return driver.EXIT_FAILED
    except interp.Unevaluable as exc:
        print(f"error: cannot execute: {exc}", file=sys.stderr)
        return driver.EXIT_FAILED
    for v in outs:
        print(_show(v))
    for a in args:
        if isinstance(a, list):
            print(json.dumps(a))
    return driver.EXIT_VERIFIED


def cmd_corpus(ns):
    manifest = ns.manifest or os.path.join(ns.dir, "manifest.jsonl")
    results = driver.run_corpus(ns.dir, manifest, _options(ns))
    failed = 0
    for r in results:
        mark = "ok  " if r.passed else "FAIL"
        line = f"{mark} {r.entry.file} ({r.entry.expect})"
        if not r.passed:
            failed += 1
            line += f": {r.reason}"
        print(line)
    print(f"{len(results) - failed}/{len(results)} corpus entries as expected")
    return driver.EXIT_VERIFIED if failed == 0 else driver.EXIT_FAILED


def build_parser():
    p = argparse.ArgumentParser(prog="minivc", description="Batch verifier for a "
                                "small Dafny subset.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="verify one source file")
    v.add_argument("file")
    _add_solver_flags(v)
    v.add_argument("--json", action="store_true", help="print the report as JSON")
    v.add_argument("--show-decreases", action="store_true",
                   help="print the termination metric used at each site")
    v.add_argument("--dump-smt", metavar="DIR", default=None)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("run", help="execute a method with the interpreter")
    r.add_argument("file")
    r.add_argument("method")
    r.add_argument("args", nargs="*", help="JSON values, e.g. 5 or [3,1,2]")
    r.add_argument("--no-check", action="store_true",
                   help="skip runtime contract checks")
    r.add_argument("--budget", type=int, default=interp.DEFAULT_BUDGET)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("corpus", help="verify a corpus against its manifest")
    c.add_argument("dir", nargs="?", default=driver.corpus_dir())
    c.add_argument("--manifest", default=None)
    _add_solver_flags(c)
    c.set_defaults(func=cmd_corpus)
    return p


def main(argv=None):
    ns = build_parser().parse_args(argv)
    return ns.func(ns)


if __name__ == "__main__":
    sys.exit(main())
