"""
Termination metrics
===================

Loops and recursive calls need a metric that decreases in a well-founded
order.  Metrics are guessed from loop guards and parameters, and a
``decreases`` clause overrides the guess; tuples compare
lexicographically.
"""

import os

from minivc import driver, verify_file

corpus = driver.corpus_dir()
opts = driver.Options(show_decreases=True)


def show(name):
    r = verify_file(os.path.join(corpus, name + ".dfy"), opts)
    print(f"{name}: {r.verdict}")
    for d in r.diagnostics:
        print("   ", d.format())


# i jumps from one end of the array to the other, so the metric n/2 - i
# guessed from the guard does not decrease; a ghost counter c gives n - c
show("create_array_no_ghost")
show("create_array_ghost")

# mutual recursion on a list: xs alone does not decrease from M to M1,
# the tuples (xs, 1) and (xs, 0) do
show("mutual_recursion_no_tuple")
show("mutual_recursion_tuple")
