"""Data disambiguation under a model, and brute-force instantiation oracles.

Given a model, each imprecise observation is replaced by its most plausible
precise value: the candidate with the smallest loss.  The oracles enumerate
instantiations on a grid and are meant for small test problems only.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Example
from .fuzzy_sets import (
    CrispLabel,
    FuzzyLabel,
    Interval,
    Precise,
    Trapezoid,
    alpha_cut,
    is_label_kind,
    membership,
)
from .losses import MARGIN_LOSSES, REAL_LOSSES, level_grid, margin_f, residual_loss
from .models import LinearModel
from .risk import as_spec, level_evaluation

MAX_GRID_POINTS = 50
MAX_ORACLE_EXAMPLES = 6


def _default_loss(example: Example) -> str:
    return "logistic" if is_label_kind(example.y) else "l2"


def disambiguate(model: LinearModel, example: Example, loss=None, alpha: float = 1.0):
    """Most plausible precise ``(x, y)`` inside the ``alpha``-cut of ``example``."""
    loss = loss or _default_loss(example)
    _, sel = level_evaluation(model, [example], loss, np.array([float(alpha)]))
    x = tuple(float(v) for v in sel.x[0, 0])
    y = sel.y[0, 0]
    return x, (int(y) if is_label_kind(example.y) else float(y))


@dataclass
class GradualSelection:
    alphas: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def at(self, k: int):
        return tuple(self.x[k]), float(self.y[k])


def gradual_selection(model: LinearModel, example: Example, alphas=None, loss=None) -> GradualSelection:
    """Disambiguation of every level cut of a fuzzy example."""
    alphas = level_grid() if alphas is None else np.asarray(alphas, dtype=float)
    loss = loss or _default_loss(example)
    _, sel = level_evaluation(model, [example], loss, alphas)
    return GradualSelection(alphas, sel.x[:, 0, :], sel.y[:, 0])


def instantiation_membership(data: Sequence[Example], instantiation: Sequence[tuple]) -> float:
    """Joint plausibility ``min_i mu_i(z_i)`` of a precise instantiation.

    Reported for reference; the loss-minimization method never uses it.
    """
    degrees = []
    for e, (x, y) in zip(data, instantiation):
        for coord, v in zip(e.x, x):
            if isinstance(coord, (Interval, Trapezoid)):
                degrees.append(membership(coord, v))
            else:
                degrees.append(1.0 if v == coord else 0.0)
        degrees.append(membership(e.y, y))
    return min(degrees) if degrees else 1.0


# -- oracles ------------------------------------------------------------------

def _grid(iv: Interval, step: float, max_points: int) -> np.ndarray:
    if iv.width == 0:
        return np.array([iv.lo])
    m = int(np.ceil(iv.width / step - 1e-9)) + 1
    if m > max_points:
        raise ValueError(f"grid step {step} gives {m} points on [{iv.lo}, {iv.hi}] (limit {max_points})")
    # uniform, both endpoints included
    return np.linspace(iv.lo, iv.hi, max(m, 2))


def _candidates(e: Example, step: float, max_points: int):
    """All grid instantiations ``(X (m, p), y (m,))`` of one set-valued example."""
    graded_y = (isinstance(e.y, Trapezoid) and (e.y.a, e.y.c) != (e.y.b, e.y.d)) or (
        isinstance(e.y, FuzzyLabel) and any(0 < mu < 1 for mu in e.y.memberships.values()))
    if e.fuzzy_input or graded_y:
        raise ValueError("the instantiation oracle takes set-valued (not graded) data")
    axes = [_grid(iv, step, max_points) for iv in e.input_box()]
    if is_label_kind(e.y):
        labels = sorted(alpha_cut(e.y, 1.0), key=str)
        ys = np.array(labels, dtype=float)
    else:
        y = e.y
        ys = _grid(alpha_cut(y, 1.0) if not isinstance(y, Precise) else Interval(y.value, y.value),
                   step, max_points)
    pts = np.array(list(itertools.product(*axes, ys)), dtype=float)
    return pts[:, :-1], pts[:, -1]


def default_grid_step(data: Sequence[Example], max_points: int = MAX_GRID_POINTS) -> float:
    widths = [iv.width for e in data for iv in e.input_box()]
    for e in data:
        if not is_label_kind(e.y) and not isinstance(e.y, Precise):
            widths.append(alpha_cut(e.y, 1.0).width)
    widest = max(widths, default=0.0)
    return widest / (max_points - 1) if widest > 0 else 1.0


def _pointwise_loss(kind: str, scores: np.ndarray, ys: np.ndarray) -> np.ndarray:
    if kind in REAL_LOSSES:
        return residual_loss(kind, np.abs(ys - scores))
    if kind in MARGIN_LOSSES:
        return margin_f(kind, ys * scores)
    return (np.where(scores >= 0, 1.0, -1.0) != ys).astype(float)


def brute_force_instantiation_risk(model: LinearModel, data: Sequence[Example], loss,
                                   grid_step: float | None = None,
                                   max_points: int = MAX_GRID_POINTS):
    """Smallest empirical risk over all grid instantiations of set-valued data.

    The empirical risk is a sum of per-example terms, so the minimum over the
    product grid is attained by minimizing every term over its own grid.
    Returns the minimum risk and the minimizing instantiation as precise
    examples.
    """
    data = list(data)
    if not data:
        raise ValueError("empty dataset")
    if len(data) > MAX_ORACLE_EXAMPLES:
        raise ValueError(f"oracle limited to {MAX_ORACLE_EXAMPLES} examples")
    kind = as_spec(loss).base
    step = grid_step or default_grid_step(data, max_points)
    w = np.asarray(model.weights)
    total, chosen = 0.0, []
    for e in data:
        X, ys = _candidates(e, step, max_points)
        losses = _pointwise_loss(kind, X @ w + model.bias, ys)
        j = int(np.argmin(losses))
        total += float(losses[j])
        y = CrispLabel(int(ys[j])) if is_label_kind(e.y) else Precise(ys[j])
        chosen.append(Example(tuple(X[j]), y))
    return total / len(data), chosen


def joint_brute_force(data: Sequence[Example], loss, weight_grid, bias_grid,
                      grid_step: float | None = None, max_points: int = MAX_GRID_POINTS):
    """Joint minimum over a grid of 1-D models ``x -> w x + b`` and all grid
    instantiations.  Returns ``(model, risk)``."""
    data = list(data)
    if not data or data[0].dim != 1:
        raise ValueError("joint oracle handles one-dimensional inputs")
    if len(data) > MAX_ORACLE_EXAMPLES:
        raise ValueError(f"oracle limited to {MAX_ORACLE_EXAMPLES} examples")
    kind = as_spec(loss).base
    step = grid_step or default_grid_step(data, max_points)
    W, Bv = np.meshgrid(np.asarray(weight_grid, float), np.asarray(bias_grid, float), indexing="ij")
    risk = np.zeros_like(W)
    for e in data:
        X, ys = _candidates(e, step, max_points)
        scores = W[..., None] * X[:, 0] + Bv[..., None]
        risk += _pointwise_loss(kind, scores, ys).min(axis=-1)
    risk /= len(data)
    i, j = np.unravel_index(int(np.argmin(risk)), risk.shape)
    return LinearModel((W[i, j],), Bv[i, j]), float(risk[i, j])
