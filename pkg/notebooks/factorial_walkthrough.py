"""
Verifying an iterative factorial
================================

A loop that computes n! starting from f := n forgets the case n == 0.
The verifier reports the invariant that does not hold on entry, together
with a counterexample, and the interpreter shows the same thing at run
time.
"""

import os

from minivc import driver, interp, verify_file
from minivc.resolve import front_end
from minivc.syntax import parse

corpus = driver.corpus_dir()

# the broken version: the loop starts with f = n even when n == 0
broken = os.path.join(corpus, "factorial_broken_entry.dfy")
report = verify_file(broken)
print(report.verdict)
for d in report.errors:
    print(d.format())
    print("  counterexample:", d.model)

# run it with contract checking switched on; n = 0 trips the invariant
with open(broken) as fh:
    tp, _ = front_end(parse(fh.read(), "factorial_broken_entry.dfy"))
try:
    interp.run_method(tp, "computeFactorial", [0])
except interp.RuntimeFault as exc:
    print("runtime:", exc.kind, "at line", exc.span.line)

# the repaired version handles n == 0 separately and verifies
fixed = verify_file(os.path.join(corpus, "factorial_final.dfy"))
print(fixed.verdict, fixed.counts())

# the guessed termination metrics, one per recursive function or loop
for decl in fixed.declarations:
    for m in decl.metrics:
        print(decl.name, "decreases", m["metric"], f"({m['origin']})")
