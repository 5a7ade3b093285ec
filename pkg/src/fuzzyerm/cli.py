"""Command line interface: ``fuzzyerm <command> ...``.

Commands
--------
loss-curve    tabulate a (fuzzy, set or GMLI) loss as a function of the prediction
risk          level-wise risk function and aggregated risk of a model on data
fit           fit a linear model and write it as JSON
disambiguate  most plausible precise data under a model, as JSON lines
experiment    run the two-Gaussian corrupted-label experiment, write a CSV curve
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import gmli, losses
from .dataset import Example, binary_label_arrays, read_jsonl
from .disambiguate import disambiguate
from .experiments import ExperimentConfig, curve_csv, run_experiment
from .fuzzy_sets import (
    CrispLabel,
    FuzzyLabel,
    Interval,
    Precise,
    datum_from_json,
    datum_to_json,
    is_label_kind,
)
from .losses import LossSpec
from .models import LinearModel
from .optimize import OptimizerConfig, fit
from .risk import RiskConfig, aggregated_risk, gmli_risk, risk_function


def _grid(text: str) -> np.ndarray:
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError("need lo <= hi and step > 0")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def _datum(text: str):
    try:
        return datum_from_json(json.loads(text))
    except (json.JSONDecodeError, ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"bad fuzzy datum {text!r}: {exc}") from None


def _label_datum(args):
    if args.fuzzy is not None:
        if not is_label_kind(args.fuzzy):
            raise ValueError("margin losses need a label datum or --w")
        return args.fuzzy
    return FuzzyLabel.discounted(1, args.w)


def curve_values(args) -> np.ndarray:
    """Loss at every grid point, for the parsed ``loss-curve`` arguments."""
    spec = LossSpec.parse(args.loss, sigma=args.sigma)
    xs = args.range
    if spec.mode == "gmli" and spec.base == "logistic":
        y, w = (1, args.w) if args.fuzzy is None else _binary(args.fuzzy)
        return np.array([gmli.gmli_logistic_loss(w, y, s) for s in xs])
    if spec.mode == "gmli":
        Y = args.fuzzy
        if not isinstance(Y, (Interval, Precise)):
            raise ValueError("gmli-interval needs an interval or real datum")
        cfg = gmli.GmliConfig(sigma=args.sigma)
        f = gmli.normalized_gmli_interval_loss if args.normalized else gmli.gmli_interval_loss
        return np.array([f(Y, s, cfg) for s in xs])
    if spec.base == losses.ZERO_ONE:
        Y = _label_datum(args)
        return np.array([losses.fuzzy_label_loss(Y, 1 if s >= 0 else -1) for s in xs])
    if spec.is_margin:
        Y = _label_datum(args)
        return np.array([losses.fuzzy_datum_margin_loss(spec.base, Y, s, args.d) for s in xs])
    if args.fuzzy is None or is_label_kind(args.fuzzy):
        raise ValueError(f"{spec.base} needs a real-valued datum via --fuzzy")
    return np.array([losses.fuzzy_loss(spec.base, args.fuzzy, s) for s in xs])


def _binary(Y):
    y, w = binary_label_arrays([Y])
    return int(y[0]), float(w[0])


def cmd_loss_curve(args) -> int:
    values = curve_values(args)
    out = ["yhat,loss"] + [f"{x:.10g},{v:.12g}" for x, v in zip(args.range, values)]
    _emit("\n".join(out) + "\n", args.out)
    return 0


def cmd_risk(args) -> int:
    model = LinearModel.load(args.model)
    data = read_jsonl(args.data)
    spec = LossSpec.parse(args.loss, sigma=args.sigma)
    cfg = RiskConfig(levels=args.levels)
    if spec.mode == "gmli":
        _emit(f"# gmli_risk={gmli_risk(model, data, spec):.12g}\n", args.out)
        return 0
    rf = risk_function(model, data, spec, cfg)
    text = rf.to_csv() + f"# aggregated_risk={aggregated_risk(model, data, spec, cfg):.12g}\n"
    _emit(text, args.out)
    return 0


def cmd_fit(args) -> int:
    data = read_jsonl(args.data)
    spec = LossSpec.parse(args.loss, sigma=args.sigma)
    risk_cfg = RiskConfig(levels=args.levels, lam=args.lam)
    opt = OptimizerConfig(learning_rate=args.lr, max_iters=args.iters, restarts=args.restarts,
                          seed=args.seed, grad_tol=args.grad_tol)
    res = fit(data, spec, risk_cfg, opt)
    res.model.save(args.out)
    print(json.dumps({"risk": res.risk, "model": res.model.to_json(),
                      "method": res.diagnostics.get("method")}))
    return 0


def _precise_json(x: tuple, y, example: Example) -> dict:
    if is_label_kind(example.y):
        y_out = datum_to_json(CrispLabel(y))
    else:
        y_out = datum_to_json(Precise(y))
    return {"x": list(x), "y": y_out}


def cmd_disambiguate(args) -> int:
    model = LinearModel.load(args.model)
    data = read_jsonl(args.data)
    lines = []
    for e in data:
        x, y = disambiguate(model, e, args.loss, args.alpha)
        lines.append(json.dumps(_precise_json(x, y, e)))
    _emit("\n".join(lines) + ("\n" if lines else ""), args.out)
    return 0


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    points = run_experiment(args.which, cfg)
    _emit(curve_csv(points), args.out)
    return 0


def _emit(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fuzzyerm", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("loss-curve", help="tabulate a loss over a prediction grid")
    p.add_argument("--loss", required=True,
                   help="l1, l2, hinge, exponential, logistic, zero-one, gmli-interval, gmli-logistic")
    p.add_argument("--fuzzy", type=_datum, default=None,
                   help='observation as JSON, e.g. \'{"trap": [2, 4, 6, 8]}\'')
    p.add_argument("--range", type=_grid, required=True,
                   help="lo:hi:step; write --range=-2:2:0.5 when lo is negative")
    p.add_argument("--w", type=float, default=1.0, help="label confidence (margin losses)")
    p.add_argument("--d", type=float, default=0.0, help="score radius of an interval input")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--normalized", action="store_true", help="subtract the GMLI minimum")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_loss_curve)

    p = sub.add_parser("risk", help="risk function of a model on data")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--loss", required=True)
    p.add_argument("--levels", type=int, default=101)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("fit", help="fit a linear model")
    p.add_argument("--data", required=True)
    p.add_argument("--loss", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--iters", type=int, default=5000)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grad-tol", type=float, default=1e-6)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--levels", type=int, default=101)
    p.add_argument("--sigma", type=float, default=1.0)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("disambiguate", help="precise selections under a model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--loss", default=None, help="defaults to l2 (real) or logistic (labels)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_disambiguate)

    p = sub.add_parser("experiment", help="corrupted-label Gaussian experiment")
    p.add_argument("--which", required=True, choices=("semi", "noise"))
    p.add_argument("--config", default=None, help="JSON config; defaults when omitted")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, TypeError, OSError) as exc:
        print(f"fuzzyerm: error: {exc}", file=sys.stderr)
        return 2
