"""Empirical, generalized, level-wise and aggregated risks of linear models."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import gmli
from .dataset import Example, Packed, pack
from .fuzzy_sets import CrispLabel, FuzzyLabel, Interval, Precise, Trapezoid, as_fuzzy_label
from .losses import (
    MARGIN_LOSSES,
    REAL_LOSSES,
    ZERO_ONE,
    LossSpec,
    level_grid,
    level_label_kernel,
    level_real_kernel,
    margin_f,
    residual_loss,
    select_label,
    select_real,
)
from .models import LinearModel

DOMINANCE_TOL = 1e-9


@dataclass(frozen=True)
class RiskConfig:
    levels: int = 101
    lam: float = 0.0
    complexity: str = "squared_norm"

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("levels must be positive")
        if self.lam < 0:
            raise ValueError("regularization weight must be nonnegative")
        if self.complexity not in ("none", "squared_norm"):
            raise ValueError(f"unknown complexity {self.complexity!r}")

    @property
    def alphas(self) -> np.ndarray:
        return level_grid(self.levels)


def as_spec(loss) -> LossSpec:
    return loss if isinstance(loss, LossSpec) else LossSpec.parse(str(loss))


def penalty(model: LinearModel, cfg: RiskConfig) -> float:
    if cfg.complexity == "none" or cfg.lam == 0:
        return 0.0
    w = np.asarray(model.weights)
    return float(cfg.lam * (w @ w))


def _packed(data, alphas=None) -> Packed:
    if isinstance(data, Packed):
        return data
    data = list(data)
    if not data:
        raise ValueError("empty dataset")
    return pack(data, alphas)


@dataclass
class Selections:
    """Disambiguated inputs ``x`` (``(..., n, p)``) and outputs ``y`` (``(..., n)``)."""

    x: np.ndarray
    y: np.ndarray

    def pairs(self, level: int | None = None) -> list[tuple[tuple, float]]:
        x = self.x if level is None else self.x[level]
        y = self.y if level is None else self.y[level]
        return [(tuple(float(v) for v in xi), float(yi)) for xi, yi in zip(x, y)]


def level_evaluation(model: LinearModel, data, loss, alphas) -> tuple[np.ndarray, Selections]:
    """Per-level set losses ``(K, n)`` and the per-level disambiguations."""
    spec = as_spec(loss)
    alphas = np.asarray(alphas, dtype=float)
    P = _packed(data, alphas)
    spec.check_kind(P.kind)
    if spec.mode != "fuzzy":
        raise ValueError("level-wise risks are defined for the fuzzy-loss mode only")
    if P.p != model.dim:
        raise ValueError(f"model expects {model.dim} inputs, data has {P.p}")
    w = np.asarray(model.weights)
    if P.fuzzy_input:
        if P.alphas is None or not np.array_equal(P.alphas, alphas):
            raise ValueError("packed fuzzy inputs were built on a different level grid")
        x_mid, x_rad = P.x_mid_lv, P.x_rad_lv
    else:
        x_mid = np.broadcast_to(P.x_mid, (len(alphas),) + P.x_mid.shape)
        x_rad = np.broadcast_to(P.x_rad, (len(alphas),) + P.x_rad.shape)
    s = x_mid @ w + model.bias
    d = x_rad @ np.abs(w)
    al = alphas[:, None]
    if P.kind == "real":
        # rounding may push the two ends past the core
        lo = np.minimum(P.a + al * (P.b - P.a), P.b)
        hi = np.maximum(P.d - al * (P.d - P.c), P.c)
        losses, _, _ = level_real_kernel(spec.base, lo, hi, s - d, s + d)
        t, y_star = select_real(s, d, lo, hi)
    else:
        losses = level_label_kernel(spec.base, P.y, P.w, s, d, al)
        t, y_star = select_label(spec.base, P.y, P.w, s, d, al)
    x_star = x_mid + t[..., None] * np.sign(w) * x_rad
    return losses, Selections(np.array(x_star), y_star)


def _weighted_mean(values: np.ndarray, weight: np.ndarray) -> np.ndarray:
    return (values * weight).sum(axis=-1) / weight.sum()


def _is_precise(e: Example) -> bool:
    return e.precise_input and isinstance(e.y, (Precise, CrispLabel))


def _is_crisp_set(e: Example) -> bool:
    if any(isinstance(v, Trapezoid) for v in e.x):
        return False
    y = e.y
    if isinstance(y, Trapezoid):
        return (y.a, y.c) == (y.b, y.d)
    if isinstance(y, FuzzyLabel):
        return all(mu in (0.0, 1.0) for mu in y.memberships.values())
    return True


def empirical_risk(model: LinearModel, data: Sequence[Example], loss, cfg: RiskConfig = RiskConfig()) -> float:
    """Average base loss on precise data plus the complexity penalty."""
    data = list(data)
    if not data:
        raise ValueError("empty dataset")
    if not all(_is_precise(e) for e in data):
        raise ValueError("empirical_risk needs precise inputs and outputs")
    spec = as_spec(loss)
    P = pack(data)
    spec.check_kind(P.kind)
    s = P.x_mid @ np.asarray(model.weights) + model.bias
    if spec.mode == "gmli":
        return gmli_risk(model, P, spec) + penalty(model, cfg)
    if P.kind == "real":
        losses = residual_loss(spec.base, np.abs(P.a - s))
    elif spec.base == ZERO_ONE:
        losses = (np.where(s >= 0, 1.0, -1.0) != P.y).astype(float)
    else:
        losses = margin_f(spec.base, P.y * s)
    return float(losses.mean()) + penalty(model, cfg)


def generalized_empirical_risk(model: LinearModel, data: Sequence[Example], loss,
                               cfg: RiskConfig = RiskConfig()) -> tuple[float, Selections]:
    """Average set loss on set-valued data, with the minimizing instantiation."""
    data = list(data)
    if not data:
        raise ValueError("empty dataset")
    if not all(_is_crisp_set(e) for e in data):
        raise ValueError("data contain graded fuzzy sets; use risk_function / aggregated_risk")
    losses, sel = level_evaluation(model, data, loss, np.array([1.0]))
    risk = float(losses[0].mean()) + penalty(model, cfg)
    return risk, Selections(sel.x[0], sel.y[0])


@dataclass
class RiskFunction:
    """Level-wise risk ``alpha -> r(alpha)`` sampled on a fixed grid."""

    alphas: np.ndarray
    values: np.ndarray
    selections: Selections | None = field(default=None, repr=False)

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.alphas.shape != self.values.shape:
            raise ValueError("alphas and values differ in length")

    def integral(self) -> float:
        """Midpoint-rule integral over (0, 1]."""
        return float(self.values.mean())

    def is_nondecreasing(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.diff(self.values) >= -tol))

    def to_csv(self) -> str:
        rows = ["alpha,risk"] + [f"{a:.10g},{r:.12g}" for a, r in zip(self.alphas, self.values)]
        return "\n".join(rows) + "\n"


def risk_function(model: LinearModel, data, loss, cfg: RiskConfig = RiskConfig()) -> RiskFunction:
    alphas = cfg.alphas
    P = _packed(data, alphas)
    losses, sel = level_evaluation(model, P, loss, alphas)
    values = _weighted_mean(losses, P.weight) + penalty(model, cfg)
    return RiskFunction(alphas, values, sel)


def aggregated_risk(model: LinearModel, data, loss, cfg: RiskConfig = RiskConfig()) -> float:
    """Level integral of the risk function (midpoint rule on the shared grid)."""
    return risk_function(model, data, loss, cfg).integral()


def gmli_risk(model: LinearModel, data, loss) -> float:
    """Average GMLI loss; observations carrying no information (w = 0) are skipped."""
    spec = as_spec(loss)
    P = _packed(data)
    if not P.precise_input:
        raise ValueError("GMLI losses need precise inputs")
    s = P.x_mid @ np.asarray(model.weights) + model.bias
    if P.kind == "real":
        check_gmli_widths(P, spec)
        losses, _ = gmli.real_kernel(P.a, P.d, s, spec.sigma)
        weight = P.weight
    else:
        losses, _ = gmli.logistic_kernel(P.y, P.w, s)
        weight = P.weight * (P.w > 0)
    if weight.sum() == 0:
        return 0.0
    return float(_weighted_mean(losses, weight))


def check_gmli_widths(P: Packed, spec: LossSpec) -> None:
    if np.any((P.b != P.a) | (P.c != P.d)):
        raise ValueError("GMLI losses are implemented for intervals and precise values only")
    width = P.d - P.a
    if np.any((width > 0) & (width < spec.min_width)):
        raise gmli.DegenerateIntervalError(f"interval narrower than min_width={spec.min_width}")


def total_risk(model: LinearModel, data, loss, cfg: RiskConfig = RiskConfig()) -> float:
    """The objective ``fit`` minimizes: aggregated risk, or GMLI risk in gmli mode.

    Precise inputs use the exact level integral of each loss rather than the
    midpoint rule, so this can differ from ``aggregated_risk`` by the
    quadrature error.  The 0/1 loss falls back to the midpoint rule.
    """
    spec = as_spec(loss)
    if spec.mode == "gmli":
        return gmli_risk(model, data, spec) + penalty(model, cfg)
    if not spec.differentiable:
        return aggregated_risk(model, data, spec, cfg)
    from .optimize import objective  # optimize builds on this module
    return objective(model, data, spec, cfg)[0]


class Dominance(enum.Enum):
    A_DOMINATES = "A>=B"
    B_DOMINATES = "B>=A"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


def dominates(rA: RiskFunction, rB: RiskFunction, tol: float = DOMINANCE_TOL) -> Dominance:
    """Pointwise comparison of two risk functions on the same grid."""
    if rA.alphas.shape != rB.alphas.shape or not np.allclose(rA.alphas, rB.alphas, rtol=0, atol=1e-15):
        raise ValueError("risk functions live on different level grids")
    a_le = bool(np.all(rA.values <= rB.values + tol))
    b_le = bool(np.all(rB.values <= rA.values + tol))
    if a_le and b_le:
        return Dominance.EQUAL
    if a_le:
        return Dominance.A_DOMINATES
    if b_le:
        return Dominance.B_DOMINATES
    return Dominance.INCOMPARABLE


def pareto_indices(functions: Sequence[RiskFunction], tol: float = DOMINANCE_TOL) -> list[int]:
    keep = []
    for i, ri in enumerate(functions):
        beaten = any(dominates(rj, ri, tol) is Dominance.A_DOMINATES
                     for j, rj in enumerate(functions) if j != i)
        if not beaten:
            keep.append(i)
    return keep


def pareto_front(candidates: Sequence[LinearModel], data, loss,
                 cfg: RiskConfig = RiskConfig()) -> list[LinearModel]:
    """Candidates whose risk function is not strictly dominated by another's."""
    candidates = list(candidates)
    if not candidates:
        raise ValueError("no candidate models")
    P = _packed(data, cfg.alphas)
    functions = [risk_function(m, P, loss, cfg) for m in candidates]
    return [candidates[i] for i in pareto_indices(functions)]
