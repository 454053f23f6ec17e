#!/usr/bin/env python3
"""Trace all four bifurcation diagrams (Model I/II, d=1/2) into out/diagrams.

Each run writes diagram.csv (constants + both plateau branches with mass,
energy, Lambda and mu1 columns) ready for the figure scripts. d=2 runs take
several minutes each.
"""

import pathlib
import sys

from crowdsteady.cli import main

OUT = pathlib.Path("out/diagrams")

if __name__ == "__main__":
    combos = [("I", 1), ("II", 1), ("I", 2), ("II", 2)]
    if len(sys.argv) > 1:
        combos = [(m, int(d)) for m, d in (c.split("-") for c in sys.argv[1:])]
    for model, dim in combos:
        out = OUT / f"model{model}-d{dim}"
        print(f"=== {model} d={dim} -> {out}")
        code = main(["diagram", "--model", model, "--dim", str(dim), "--out", str(out)])
        if code != 0:
            sys.exit(code)
