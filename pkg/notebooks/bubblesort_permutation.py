"""
Sorting with a permutation guarantee
====================================

Bubble sort proved sorted and a permutation of its input.  The
permutation property is stated with multisets of the array contents
before and after.
"""

import os
import random

from minivc import driver, interp, verify_file
from minivc.resolve import front_end
from minivc.syntax import parse

corpus = driver.corpus_dir()
path = os.path.join(corpus, "bubblesort_final.dfy")

report = verify_file(path)
print(report.verdict, report.counts())

with open(path) as fh:
    tp, _ = front_end(parse(fh.read(), "bubblesort_final.dfy"))

cells = [7, 2, 6, 3, 4]
interp.run_method(tp, "bubbleSort", [cells])
print(cells)

# runtime contract checks run on every call, including the quantified
# invariants of bubbleStep
rng = random.Random(0)
for _ in range(20):
    xs = [rng.randint(-9, 9) for _ in range(8)]
    ys = list(xs)
    interp.run_method(tp, "bubbleSort", [ys])
    assert ys == sorted(xs)
print("20 random arrays sorted")

# without the guard on a[j-1] the invariant can index out of range
bad = verify_file(os.path.join(corpus, "bubblestep_unguarded.dfy"))
for d in bad.errors:
    print(d.format())
