#!/usr/bin/env python3
"""Generate the shipped datasets under data/ that the figure scripts consume.

Produces, for Model I and Model II in d=1:
  data/model{I,II}-d1/diagram.csv         full bifurcation diagram
  data/model{I,II}-d1/branch_profiles.csv profile families along the branches
  data/model{I,II}-d1/constants.csv       constant-solution table
  data/model{I,II}-d1/stability_report.json, run_summary.json (Model II)

Runtime is dominated by branch tracing (a few minutes per model).
"""

import pathlib
import sys

from crowdsteady.cli import main

ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA = ROOT / "data"


def run(args):
    code = main(args)
    if code != 0:
        sys.exit(code)


def make_model(model: str, phi0_spectrum: float, phi0_evolve: float):
    out = DATA / f"model{model}-d1"
    run(["diagram", "--model", model, "--dim", "1", "--out", str(out)])
    run(["branch", "--model", model, "--dim", "1", "--out", str(out)])
    run(["constants", "--model", model, "--dim", "1", "--out", str(out)])
    run(["spectrum", "--model", model, "--dim", "1", "--phi0", str(phi0_spectrum),
         "--direction", "increasing", "--out", str(out)])
    if model == "II":
        run(["evolve", "--model", model, "--dim", "1", "--phi0", str(phi0_evolve),
             "--scenario", "perturbed_plateau", "--out", str(out)])


if __name__ == "__main__":
    make_model("I", 130.0, 130.0)
    make_model("II", 300.0, 300.0)
    print(f"datasets written under {DATA}")
