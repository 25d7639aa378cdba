"""minivc: a batch auto-active verifier for a small Dafny subset.

Typical use::

    from minivc import verify_file
    report = verify_file("bubblesort.dfy")
    print(report.verdict)
"""

from minivc.driver import Options, VerificationReport, run_corpus, verify_file, verify_text
from minivc.interp import call_function, run_method
from minivc.resolve import front_end, resolve_and_typecheck
from minivc.syntax import parse, pretty_print

__version__ = "0.1.0"

__all__ = ["Options", "VerificationReport", "call_function", "front_end", "parse",
           "pretty_print", "resolve_and_typecheck", "run_corpus", "run_method",
           "verify_file", "verify_text"]
