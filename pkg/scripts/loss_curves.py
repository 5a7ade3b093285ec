#!/usr/bin/env python3
"""Tabulate the main losses over a prediction grid, one CSV per family.

* ``real_losses.csv``: fuzzy L1 / L2 against a trapezoid, an interval and a
  precise value, next to the GMLI interval loss.
* ``margin_losses.csv``: the fuzzy logistic and hinge losses and the GMLI
  logistic loss of a positive label at several confidences.
"""
import argparse
import csv
from pathlib import Path

import numpy as np

from fuzzyerm import Interval, Precise, Trapezoid, fuzzy_loss, fuzzy_margin_loss
from fuzzyerm.gmli import gmli_interval_loss, gmli_logistic_loss

CONFIDENCES = (0.0, 0.3, 0.7, 1.0)


def real_rows(grid):
    data = {"trap": Trapezoid(2, 4, 6, 8), "interval": Interval(4, 6), "precise": Precise(5)}
    header = ["yhat"] + [f"{k}_{name}" for name in data for k in ("l1", "l2")] + ["gmli_interval"]
    rows = []
    for v in grid:
        row = [v] + [fuzzy_loss(k, Y, v) for Y in data.values() for k in ("l1", "l2")]
        rows.append(row + [gmli_interval_loss(data["interval"], v)])
    return header, rows


def margin_rows(grid):
    header = ["score"] + [f"{name}_w{w:g}" for name in ("logistic", "hinge", "gmli") for w in CONFIDENCES]
    rows = []
    for s in grid:
        row = [s] + [fuzzy_margin_loss(k, w, 1, s) for k in ("logistic", "hinge") for w in CONFIDENCES]
        rows.append(row + [gmli_logistic_loss(w, 1, s) for w in CONFIDENCES])
    return header, rows


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        out.writerows([[f"{v:.10g}" for v in row] for row in rows])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="results")
    args = parser.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write(out / "real_losses.csv", *real_rows(np.linspace(0, 10, 201)))
    write(out / "margin_losses.csv", *margin_rows(np.linspace(-4, 4, 161)))
    print(f"wrote {out / 'real_losses.csv'} and {out / 'margin_losses.csv'}")


if __name__ == "__main__":
    main()
