"""
Helping the solver with lemmas
==============================

compute5f returns 2^(3k) - 3^k, which is always a multiple of 5.  Without
help the loop invariants and the postcondition are not provable.  Two
lemmas, one of them proved by a calculation, close the gap.
"""

import os

from minivc import driver, verify_file, vcgen
from minivc.resolve import front_end
from minivc.syntax import parse

corpus = driver.corpus_dir()


def show(name):
    r = verify_file(os.path.join(corpus, name + ".dfy"))
    print(f"{name}: {r.verdict}")
    for d in r.errors + r.warnings:
        print("   ", d.format())


# no lemma calls: maintenance of the exp invariant and the postcondition fail
show("compute5f_no_lemmas")

# lemmas declared but not proved: the verdict is incomplete, not verified
show("compute5f_lemmas_unproved")

# the full proof, with a calc statement in DivBy5_Lemma
show("compute5f_calc")

# each calc step is its own obligation
with open(os.path.join(corpus, "compute5f_calc.dfy")) as fh:
    program = parse(fh.read(), "compute5f_calc.dfy")
tp, _ = front_end(program)
obs = vcgen.vc_declaration(program.find("DivBy5_Lemma"), tp)
for ob in obs:
    if ob.kind == "calc-step":
        print("calc step at line", ob.span.line)

# the shorter inductive proof needs no calc at all
show("compute5f_simplified")
