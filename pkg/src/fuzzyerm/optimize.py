"""Fitting linear models by full-batch gradient descent on generalized risks.

The engine works on a flat batch of independent problems (rows), each with its
own parameter vector ``[w, b]``; ``fit`` stacks its random restarts as rows, and
the experiment runner additionally stacks repetitions.  Every row follows the
same trajectory it would follow alone.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import gmli
from .dataset import Example, Packed, pack
from .losses import (
    LossSpec,
    fuzzy_margin_kernel,
    fuzzy_real_kernel,
    level_real_kernel,
    margin_df,
    margin_f,
)
from .models import LinearModel
from .risk import RiskConfig, as_spec, check_gmli_widths, total_risk

log = logging.getLogger(__name__)


class NonFiniteGradientError(FloatingPointError):
    def __init__(self, message: str, iterate: np.ndarray):
        super().__init__(message)
        self.iterate = iterate


@dataclass(frozen=True)
class OptimizerConfig:
    learning_rate: float = 0.1
    max_iters: int = 5000
    grad_tol: float = 1e-6
    restarts: int = 10
    init_scale: float = 1.0
    seed: int = 0
    closed_form: bool = True
    keep_history: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0 or self.grad_tol <= 0:
            raise ValueError("learning_rate and grad_tol must be positive")
        if self.max_iters < 1 or self.restarts < 1:
            raise ValueError("max_iters and restarts must be positive")
        if self.init_scale < 0:
            raise ValueError("init_scale must be nonnegative")


@dataclass
class FitResult:
    model: LinearModel
    risk: float
    diagnostics: dict = field(default_factory=dict)


# -- objective ----------------------------------------------------------------

_ARRAYS = ("x_mid", "x_rad", "weight", "a", "b", "c", "d", "y", "w", "x_mid_lv", "x_rad_lv")


def take_rows(P: Packed, rows: np.ndarray) -> Packed:
    """Packed batch whose leading axis selects ``rows`` of a stacked ``P``."""
    out = replace(P)
    for name in _ARRAYS:
        arr = getattr(P, name)
        if arr is not None:
            setattr(out, name, arr[rows])
    return out


def validate(P: Packed, spec: LossSpec) -> None:
    spec.check_kind(P.kind)
    if not spec.differentiable:
        raise ValueError("the 0/1 loss has no useful gradient; pick a margin loss to fit")
    if spec.mode == "gmli":
        if not P.precise_input:
            raise ValueError("GMLI losses need precise inputs")
        if P.kind == "real":
            check_gmli_widths(P, spec)


def batch_objective(theta: np.ndarray, P: Packed, spec: LossSpec, cfg: RiskConfig,
                    precise_input: bool | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Risk and gradient for rows ``theta`` of shape ``(B, p+1)``.

    ``P`` holds matching per-row data with leading axis ``B``.
    """
    w, b = theta[:, :-1], theta[:, -1]
    if precise_input is None:
        precise_input = P.precise_input
    weight = P.weight
    if spec.mode == "gmli" and P.kind == "label":
        # no-information observations have loss 0 for every model
        weight = weight * (P.w > 0)
        total = np.maximum(weight.sum(axis=-1), 1.0)
    else:
        total = weight.sum(axis=-1)
    coef = weight / total[:, None]

    if P.fuzzy_input:
        loss, gs, gd = _level_terms(w, b, P, spec)
        K = loss.shape[1]
        ck = coef[:, None, :] / K
        risk = (loss * ck).sum(axis=(1, 2))
        grad_w = (np.einsum("bkn,bknp->bp", gs * ck, P.x_mid_lv)
                  + np.sign(w) * np.einsum("bkn,bknp->bp", gd * ck, P.x_rad_lv))
        grad_b = (gs * ck).sum(axis=(1, 2))
    else:
        s = np.einsum("bnp,bp->bn", P.x_mid, w) + b[:, None]
        d = 0.0 if precise_input else np.einsum("bnp,bp->bn", P.x_rad, np.abs(w))
        loss, gs, gd = _example_terms(s, d, P, spec)
        risk = (loss * coef).sum(axis=-1)
        cs = gs * coef
        grad_b = cs.sum(axis=-1)
        grad_w = np.einsum("bn,bnp->bp", cs, P.x_mid)
        if not precise_input:
            grad_w = grad_w + np.sign(w) * np.einsum("bn,bnp->bp", gd * coef, P.x_rad)
    if cfg.lam > 0 and cfg.complexity == "squared_norm":
        risk = risk + cfg.lam * (w * w).sum(axis=-1)
        grad_w = grad_w + 2.0 * cfg.lam * w
    return risk, np.concatenate([grad_w, grad_b[:, None]], axis=-1)


def _example_terms(s, d, P: Packed, spec: LossSpec):
    """Per-example loss and its partial derivatives in score centre and radius."""
    if P.kind == "real":
        if spec.mode == "gmli":
            loss, gs = gmli.real_kernel(P.a, P.d, s, spec.sigma)
            return loss, gs, 0.0
        loss, gu, gv = fuzzy_real_kernel(spec.base, P.a, P.b, P.c, P.d, s - d, s + d)
        return loss, gu + gv, gv - gu
    if spec.mode == "gmli":
        loss, gs = gmli.logistic_kernel(P.y, P.w, s)
        return loss, gs, 0.0
    return fuzzy_margin_kernel(spec.base, P.y, P.w, s, d)


def _level_terms(w, b, P: Packed, spec: LossSpec):
    """Per-level terms for fuzzy inputs, shapes ``(B, K, n)``."""
    s = np.einsum("bknp,bp->bkn", P.x_mid_lv, w) + b[:, None, None]
    d = np.einsum("bknp,bp->bkn", P.x_rad_lv, np.abs(w))
    al = P.alphas[:, None]
    if P.kind == "real":
        lo = np.minimum(P.a[:, None, :] + al * (P.b - P.a)[:, None, :], P.b[:, None, :])
        hi = np.maximum(P.d[:, None, :] - al * (P.d - P.c)[:, None, :], P.c[:, None, :])
        loss, gu, gv = level_real_kernel(spec.base, lo, hi, s - d, s + d)
        return loss, gu + gv, gv - gu
    y, wc = P.y[:, None, :], P.w[:, None, :]
    both = al <= 1.0 - wc
    t = np.where(both, np.abs(s), y * s) + d
    g = margin_df(spec.base, t)
    gs = g * np.where(both, np.sign(s), y)
    return margin_f(spec.base, t), gs, g


def objective(model: LinearModel | np.ndarray, data, loss, cfg: RiskConfig = RiskConfig()):
    """Risk and gradient of a single model; ``theta = [w, b]``."""
    spec = as_spec(loss)
    P = data if isinstance(data, Packed) else pack(list(data), cfg.alphas)
    validate(P, spec)
    theta = model.params if isinstance(model, LinearModel) else np.asarray(model, float)
    risk, grad = batch_objective(theta[None, :], _stack(P), spec, cfg)
    return float(risk[0]), grad[0]


# -- gradient descent -----------------------------------------------------------

def descend(theta0: np.ndarray, P: Packed, spec: LossSpec, risk_cfg: RiskConfig,
            opt: OptimizerConfig) -> dict:
    """Gradient descent on every row of ``theta0`` (rows index into ``P``).

    Keeps, per row, the best iterate seen; rows stop once their gradient norm
    drops to ``grad_tol``.  Converged rows are dropped from the working set.
    """
    theta = np.array(theta0, dtype=float)
    B = theta.shape[0]
    precise_input = P.precise_input
    best_theta = theta.copy()
    best_risk = np.full(B, np.inf)
    iters = np.zeros(B, dtype=int)
    converged = np.zeros(B, dtype=bool)
    grad_norm = np.full(B, np.inf)
    history = [] if opt.keep_history else None
    live = np.arange(B)
    data = P
    for it in range(opt.max_iters + 1):
        risk, grad = batch_objective(theta[live], data, spec, risk_cfg, precise_input)
        if not np.all(np.isfinite(grad)) or not np.all(np.isfinite(risk)):
            bad = live[~(np.isfinite(grad).all(axis=1) & np.isfinite(risk))][0]
            raise NonFiniteGradientError(f"non-finite risk/gradient at iteration {it}", theta[bad].copy())
        if history is not None:
            row = np.full(B, np.nan)
            row[live] = risk
            history.append(row)
        better = risk < best_risk[live]
        best_risk[live[better]] = risk[better]
        best_theta[live[better]] = theta[live[better]]
        gn = np.sqrt((grad * grad).sum(axis=1))
        grad_norm[live] = gn
        done = gn <= opt.grad_tol
        converged[live[done]] = True
        if it == opt.max_iters:
            break
        step = ~done
        theta[live[step]] -= opt.learning_rate * grad[step]
        iters[live[step]] += 1
        if not step.all():
            keep = np.flatnonzero(step)
            live = live[keep]
            if live.size == 0:
                break
            data = take_rows(data, keep)
    out = {"theta": best_theta, "risk": best_risk, "iterations": iters,
           "converged": converged, "grad_norm": grad_norm}
    if history is not None:
        out["history"] = np.array(history)
    return out


def initial_params(rng: np.random.Generator, restarts: int, dim: int, scale: float) -> np.ndarray:
    return rng.uniform(-scale, scale, size=(restarts, dim + 1))


def _least_squares(P: Packed, cfg: RiskConfig) -> np.ndarray:
    A = np.hstack([P.x_mid, np.ones((P.n, 1))]) * np.sqrt(P.weight)[:, None]
    y = P.a * np.sqrt(P.weight)
    N = P.weight.sum()
    if cfg.lam > 0 and cfg.complexity == "squared_norm":
        reg = np.diag(np.append(np.full(P.p, cfg.lam), 0.0))
        return np.linalg.solve(A.T @ A / N + reg, A.T @ y / N)
    return np.linalg.lstsq(A, y, rcond=None)[0]


def fit(data: Sequence[Example] | Packed, loss, risk_cfg: RiskConfig = RiskConfig(),
        opt_cfg: OptimizerConfig = OptimizerConfig()) -> FitResult:
    """Best linear model over ``opt_cfg.restarts`` gradient-descent runs.

    Minimizes the aggregated risk for fuzzy data (the set-valued and precise
    cases are special cases) or the GMLI risk in ``gmli`` mode.  Squared loss
    on precise data is solved in closed form.
    """
    spec = as_spec(loss)
    if isinstance(data, Packed):
        P = data
    else:
        data = list(data)
        if not data:
            raise ValueError("empty dataset")
        P = pack(data, risk_cfg.alphas)
    if P.n == 0:
        raise ValueError("empty dataset")
    validate(P, spec)

    if (opt_cfg.closed_form and spec.mode == "fuzzy" and spec.base == "l2"
            and P.precise_input and P.precise_output):
        theta = _least_squares(P, risk_cfg)
        model = LinearModel.from_params(theta)
        return FitResult(model, total_risk(model, P, spec, risk_cfg), {"method": "least_squares"})

    rng = np.random.default_rng(opt_cfg.seed)
    theta0 = initial_params(rng, opt_cfg.restarts, P.p, opt_cfg.init_scale)
    rows = np.zeros(opt_cfg.restarts, dtype=int)
    stacked = take_rows(_stack(P), rows)
    res = descend(theta0, stacked, spec, risk_cfg, opt_cfg)
    best = int(np.argmin(res["risk"]))
    model = LinearModel.from_params(res["theta"][best])
    diagnostics = {
        "method": "gradient_descent",
        "best_restart": best,
        "restart_risks": res["risk"].tolist(),
        "iterations": res["iterations"].tolist(),
        "converged": res["converged"].tolist(),
        "grad_norm": res["grad_norm"].tolist(),
    }
    if "history" in res:
        diagnostics["history"] = res["history"]
    log.debug("fit: best restart %d, risk %.6g", best, res["risk"][best])
    return FitResult(model, float(res["risk"][best]), diagnostics)


def _stack(P: Packed) -> Packed:
    """Add a leading axis of length one to every array."""
    out = replace(P)
    for name in _ARRAYS:
        arr = getattr(P, name)
        if arr is not None:
            setattr(out, name, arr[None])
    return out


def gradient_check(loss, model: LinearModel, data, cfg: RiskConfig = RiskConfig(),
                   step: float = 1e-6) -> float:
    """Largest relative deviation between analytic and central-difference gradients."""
    spec = as_spec(loss)
    P = data if isinstance(data, Packed) else pack(list(data), cfg.alphas)
    theta = model.params
    _, grad = objective(theta, P, spec, cfg)
    fd = np.empty_like(theta)
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = step
        fd[j] = (objective(theta + e, P, spec, cfg)[0] - objective(theta - e, P, spec, cfg)[0]) / (2 * step)
    scale = max(np.max(np.abs(fd)), np.max(np.abs(grad)), 1e-12)
    return float(np.max(np.abs(grad - fd)) / scale)
