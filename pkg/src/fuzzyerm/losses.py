"""Base losses and their generalizations to set-valued and fuzzy observations.

A set-valued observation is scored by the smallest loss over all of its
candidate values; a fuzzy observation by the level-integral of that set loss.
For linear models and box-valued inputs every quantity reduces to the score
interval ``[u, v] = [s - d, s + d]``, which is what the array kernels below
take.  The scalar functions at the bottom are thin wrappers around them.

Kinks use the zero subgradient whenever zero is in the subdifferential.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


from .fuzzy_sets import (
    FuzzyDatum,
    Interval,
    Precise,
    Trapezoid,
    alpha_cut,
    as_fuzzy_label,
    as_trapezoid,
    is_label_kind,
    membership,
    normalize_label,
)

REAL_LOSSES = ("l1", "l2")
MARGIN_LOSSES = ("hinge", "exponential", "logistic")
ZERO_ONE = "zero_one"

_ALIASES = {
    "l1": "l1", "abs": "l1", "absolute": "l1",
    "l2": "l2", "squared": "l2", "sq": "l2",
    "zero_one": "zero_one", "zeroone": "zero_one", "zero-one": "zero_one", "0/1": "zero_one", "01": "zero_one",
    "hinge": "hinge",
    "exponential": "exponential", "exp": "exponential",
    "logistic": "logistic", "log": "logistic", "logloss": "logistic",
}

DEFAULT_LEVELS = 101


def loss_kind(name: str) -> str:
    try:
        return _ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown loss {name!r}") from None


def level_grid(levels: int = DEFAULT_LEVELS) -> np.ndarray:
    """Midpoints ``(k - 1/2) / K`` of a uniform partition of (0, 1]."""
    if levels < 1:
        raise ValueError("need at least one level")
    return (np.arange(levels) + 0.5) / levels


# -- array kernels ----------------------------------------------------------

def residual_loss(kind: str, r):
    """Base loss of a nonnegative residual."""
    return r if kind == "l1" else r * r


def residual_grad(kind: str, r):
    if kind == "l1":
        return (r > 0).astype(float)
    return 2.0 * r


def margin_f(kind: str, t):
    if kind == "hinge":
        return np.maximum(1.0 - t, 0.0)
    if kind == "exponential":
        return np.exp(-t)
    if kind == "logistic":
        t = np.asarray(t, dtype=float)
        return np.log1p(np.exp(-np.abs(t))) + np.maximum(-t, 0.0)
    raise ValueError(f"not a margin loss: {kind!r}")


def margin_df(kind: str, t):
    if kind == "hinge":
        return np.where(t < 1.0, -1.0, 0.0)
    if kind == "exponential":
        return -np.exp(-t)
    if kind == "logistic":
        t = np.asarray(t, dtype=float)
        e = np.exp(-np.abs(t))
        return -np.where(t >= 0, e, 1.0) * (1.0 / (1.0 + e))
    raise ValueError(f"not a margin loss: {kind!r}")


def logistic_parts(t):
    """Logistic loss and derivative at ``t`` and at ``|t|`` from one exponential."""
    t = np.asarray(t, dtype=float)
    e = np.exp(-np.abs(t))
    tail = np.log1p(e)
    r = 1.0 / (1.0 + e)
    return tail + np.maximum(-t, 0.0), -np.where(t >= 0, e, 1.0) * r, tail, -e * r


def ramp_integral(kind: str, p, q, v):
    """``int_0^1 L((p + alpha (q - p) - v)_+) d alpha`` and its derivative in ``v``.

    One flank of a trapezoid: the cut end moves linearly from ``p`` (alpha=0)
    to ``q`` (alpha=1) and the prediction sits at ``v``.
    """
    p, q, v = np.broadcast_arrays(*(np.asarray(z, dtype=float) for z in (p, q, v)))
    A, B = q - v, p - v
    width = np.where(q > p, q - p, 1.0)
    inside = (v > p) & (v < q)
    below = v <= p
    # both branches are evaluated everywhere; the unused one may overflow on
    # very thin flanks
    with np.errstate(over="ignore", invalid="ignore"):
        if kind == "l1":
            out_val, out_der = 0.5 * (A + B), -np.ones_like(A)
            mid_val, mid_der = 0.5 * A * A / width, -A / width
        else:
            out_val, out_der = (A * A + A * B + B * B) / 3.0, -(A + B)
            mid_val, mid_der = A ** 3 / (3.0 * width), -A * A / width
    val = np.where(below, out_val, np.where(inside, mid_val, 0.0))
    der = np.where(below, out_der, np.where(inside, mid_der, 0.0))
    return val, der


def _ramp_value(kind: str, p: float, q: float, v: float) -> float:
    """Scalar value of :func:`ramp_integral`, free of array overhead."""
    if v >= q:
        return 0.0
    A, B = q - v, p - v
    if v <= p:
        return 0.5 * (A + B) if kind == "l1" else (A * A + A * B + B * B) / 3.0
    return 0.5 * A * A / (q - p) if kind == "l1" else A ** 3 / (3.0 * (q - p))


def fuzzy_real_kernel(kind: str, a, b, c, d, u, v):
    """Fuzzy loss of trapezoid ``(a, b, c, d)`` against score range ``[u, v]``.

    Returns the loss and its partial derivatives in ``u`` and ``v``.
    """
    left, dleft = ramp_integral(kind, a, b, v)
    right, dright = ramp_integral(kind, np.negative(d), np.negative(c), np.negative(u))
    return left + right, -dright, dleft


def level_real_kernel(kind: str, lo, hi, u, v):
    """Set loss of the cut ``[lo, hi]`` against ``[u, v]``, with d/du, d/dv."""
    gl = np.maximum(np.subtract(lo, v), 0.0)
    gr = np.maximum(np.subtract(u, hi), 0.0)
    loss = residual_loss(kind, gl) + residual_loss(kind, gr)
    return loss, residual_grad(kind, gr), -residual_grad(kind, gl)


def fuzzy_margin_kernel(kind: str, y, w, s, d=0.0):
    """``w f(ys + d) + (1 - w) f(|s| + d)`` with derivatives in ``s`` and ``d``."""
    t1 = y * s + d
    if kind == "logistic" and np.isscalar(d) and d == 0:
        # |s| = |ys|, so one exponential covers both terms
        f1, g1, f0, g0 = logistic_parts(t1)
    else:
        t0 = np.abs(s) + d
        f1, f0 = margin_f(kind, t1), margin_f(kind, t0)
        g1, g0 = margin_df(kind, t1), margin_df(kind, t0)
    loss = w * f1 + (1.0 - w) * f0
    ds = w * y * g1 + (1.0 - w) * np.sign(s) * g0
    dd = w * g1 + (1.0 - w) * g0
    return loss, ds, dd


def zero_one_kernel(y, w, s, d=0.0):
    """Level-integrated 0/1 loss of a binary fuzzy label against ``[s-d, s+d]``.

    The ambiguous levels (alpha <= 1 - w) always cost 0; the remaining mass
    ``w`` is lost iff no score in the range is classified as ``y``.
    """
    feasible = np.where(y > 0, s + d >= 0, s - d < 0)
    return np.where(feasible, 0.0, w)


def level_label_kernel(kind: str, y, w, s, d, alpha):
    """Per-level set loss for binary fuzzy labels (no gradient)."""
    both = alpha <= 1.0 - w
    if kind == ZERO_ONE:
        feasible = np.where(y > 0, s + d >= 0, s - d < 0)
        return np.where(both | feasible, 0.0, 1.0)
    return np.where(both, margin_f(kind, np.abs(s) + d), margin_f(kind, y * s + d))


def select_real(s, d, lo, hi):
    """Disambiguation for real outputs against score range ``[s-d, s+d]``.

    Returns ``(t, y_star)``: the input is ``mid + t * sign(w) * rad`` with
    ``t`` in [-1, 1].  When several pairs attain the minimum the midpoint of
    the overlap is taken.
    """
    s, d, lo, hi = np.broadcast_arrays(*(np.asarray(z, dtype=float) for z in (s, d, lo, hi)))
    u, v = s - d, s + d
    above, below = lo > v, hi < u
    ylo, yhi = np.maximum(u, lo), np.minimum(v, hi)
    y_mid = 0.5 * (ylo + yhi)
    safe_d = np.where(d > 0, d, 1.0)
    t_mid = np.where(d > 0, np.clip((y_mid - s) / safe_d, -1.0, 1.0), 0.0)
    t = np.where(above, 1.0, np.where(below, -1.0, t_mid))
    y_star = np.where(above, lo, np.where(below, hi, y_mid))
    return t, y_star


def select_label(kind: str, y, w, s, d, alpha):
    """Disambiguation for binary labels at level ``alpha``; returns ``(t, y_star)``.

    With both labels plausible the sign of the score decides (0 -> +1).  Along
    the box the score is pushed towards the chosen label; when the loss is flat
    there (hinge beyond the margin, 0/1 on the right side) the middle of the
    flat stretch is used.
    """
    y, w, s, d = np.broadcast_arrays(*(np.asarray(z, dtype=float) for z in (y, w, s, d)))
    both = alpha <= 1.0 - w
    y_star = np.where(both, np.where(s >= 0, 1.0, -1.0), y)
    if kind in ("hinge", ZERO_ONE):
        thresh = 1.0 if kind == "hinge" else 0.0
        safe_d = np.where(d > 0, d, 1.0)
        tau_lo = np.clip((thresh - y_star * s) / safe_d, -1.0, 1.0)
        flat = (d > 0) & (y_star * s + d >= thresh)
        tau = np.where(flat, 0.5 * (tau_lo + 1.0), 1.0)
    else:
        tau = np.ones_like(s)
    t = np.where(d > 0, y_star * tau, 0.0)
    return t, y_star


# -- scalar API -------------------------------------------------------------

def _real(v) -> float:
    if isinstance(v, Precise):
        return v.value
    if isinstance(v, str):
        raise TypeError(f"expected a real value, got label {v!r}")
    return float(v)


def base_loss(kind: str, y, yhat) -> float:
    kind = loss_kind(kind)
    if kind in REAL_LOSSES:
        return float(residual_loss(kind, abs(_real(y) - _real(yhat))))
    if kind == ZERO_ONE:
        return float(normalize_label(y) != normalize_label(yhat))
    raise ValueError(f"{kind} is a margin loss; use margin_loss")


def margin_loss(kind: str, y, s: float) -> float:
    kind = loss_kind(kind)
    y = normalize_label(y)
    if y not in (1, -1):
        raise ValueError("margin losses need y in {-1, +1}")
    return float(margin_f(kind, y * float(s)))


def _as_set(Y):
    if isinstance(Y, Interval):
        return Y
    if isinstance(Y, Precise):
        return Interval(Y.value, Y.value)
    if isinstance(Y, (int, float)) and not isinstance(Y, bool):
        return Interval(float(Y), float(Y))
    if isinstance(Y, (set, frozenset, list, tuple)):
        labels = frozenset(normalize_label(v) for v in Y)
        if not labels:
            raise ValueError("empty label set")
        return labels
    raise TypeError(f"not a set-valued observation: {Y!r}")


def set_loss(kind: str, Y, yhat) -> tuple[float, object]:
    """Smallest loss over ``Y`` and the value attaining it.

    ``Y`` is an interval (or precise value) for real losses, a set of labels
    for the 0/1 loss, and a set of labels with a real score ``yhat`` for
    margin losses.
    """
    kind = loss_kind(kind)
    Y = _as_set(Y)
    if kind in REAL_LOSSES:
        if not isinstance(Y, Interval):
            raise TypeError("real losses need an interval observation")
        y_star = Y.clamp(_real(yhat))
        return base_loss(kind, y_star, yhat), y_star
    if not isinstance(Y, frozenset):
        raise TypeError(f"{kind} needs a label-set observation")
    if kind == ZERO_ONE:
        yhat = normalize_label(yhat)
        if yhat in Y:
            return 0.0, yhat
        return 1.0, sorted(Y, key=str)[0]
    if not Y <= {1, -1}:
        raise ValueError("margin losses need labels in {-1, +1}")
    s = float(yhat)
    y_star = (1 if s >= 0 else -1) if len(Y) == 2 else next(iter(Y))
    return margin_loss(kind, y_star, s), y_star


def set_loss_xy(kind: str, model, box: Sequence[Interval], Y) -> float:
    """Smallest loss over all (x, y) in ``box x Y`` for a linear model."""
    kind = loss_kind(kind)
    box = [iv if isinstance(iv, Interval) else Interval(float(iv), float(iv)) for iv in box]
    rng = model.score_interval(box)
    s, d = rng.mid, rng.rad
    Y = _as_set(Y)
    if kind in REAL_LOSSES:
        if not isinstance(Y, Interval):
            raise TypeError("real losses need an interval observation")
        loss, _, _ = level_real_kernel(kind, Y.lo, Y.hi, rng.lo, rng.hi)
        return float(loss)
    if not isinstance(Y, frozenset):
        raise TypeError(f"{kind} needs a label-set observation")
    if kind == ZERO_ONE:
        labels = {1 if v >= 0 else -1 for v in (rng.lo, rng.hi)}
        return 0.0 if labels & set(Y) else 1.0
    if not Y <= {1, -1}:
        raise ValueError("margin losses need labels in {-1, +1}")
    if len(Y) == 2:
        return float(margin_f(kind, abs(s) + d))
    return shifted_margin_loss(kind, next(iter(Y)), s, d)


def closed_form_fuzzy_l1(Y: Trapezoid | Interval | Precise, yhat: float) -> float:
    """Level-integrated L1 loss: zero on the core, quadratic on each flank,
    linear beyond the support (independent flank widths)."""
    t = as_trapezoid(Y)
    loss, _, _ = fuzzy_real_kernel("l1", t.a, t.b, t.c, t.d, yhat, yhat)
    return float(loss)


def closed_form_fuzzy_l2(Y: Trapezoid | Interval | Precise, yhat: float) -> float:
    t = as_trapezoid(Y)
    loss, _, _ = fuzzy_real_kernel("l2", t.a, t.b, t.c, t.d, yhat, yhat)
    return float(loss)


def quadrature_error_bound(kind: str, Y, levels: int) -> float:
    """Worst-case midpoint-rule error of the level integral with ``levels`` cells.

    L1: the integrand is piecewise linear in alpha with at most one kink per
    flank, so only that cell errs, by at most ``slope * h^2 / 8``.  L2: the
    integrand is C^1 with second derivative ``2 * slope^2``, giving the
    classical ``h^2 max|g''| / 24`` per flank.
    """
    kind = loss_kind(kind)
    t = as_trapezoid(Y)
    left, right = t.b - t.a, t.d - t.c
    h2 = 1.0 / levels ** 2
    if kind == "l1":
        return (left + right) * h2 / 8.0
    if kind == "l2":
        return (left ** 2 + right ** 2) * h2 / 12.0
    raise ValueError(f"no quadrature bound for {kind}")


def quadrature_levels(kind: str, Y, tol: float) -> int:
    """Smallest level count whose error bound is within ``tol``."""
    unit = quadrature_error_bound(kind, Y, 1)
    return max(1, int(np.ceil(np.sqrt(unit / tol))))


def fuzzy_loss(kind: str, Y: FuzzyDatum, yhat: float, levels: int | None = None,
               method: str = "auto") -> float:
    """Level integral of the set loss of ``Y`` against a precise prediction.

    ``method="auto"`` uses the exact closed form (available for L1 and L2 on
    trapezoids); ``"quadrature"`` uses the midpoint rule on ``levels`` cuts.
    """
    kind = loss_kind(kind)
    if is_label_kind(Y):
        raise TypeError("label observations: use fuzzy_label_loss or fuzzy_margin_loss")
    if kind not in REAL_LOSSES:
        raise ValueError(f"{kind} does not apply to real-valued observations")
    t = as_trapezoid(Y)
    yhat = _real(yhat)
    if method == "auto":
        return _ramp_value(kind, t.a, t.b, yhat) + _ramp_value(kind, -t.d, -t.c, -yhat)
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    alphas = level_grid(levels or DEFAULT_LEVELS)
    lo = t.a + alphas * (t.b - t.a)
    hi = t.d - alphas * (t.d - t.c)
    loss, _, _ = level_real_kernel(kind, lo, hi, yhat, yhat)
    return float(np.mean(loss))


def fuzzy_label_loss(Y: FuzzyDatum, yhat) -> float:
    """Level-integrated 0/1 loss: one minus the degree of the predicted label."""
    return 1.0 - membership(as_fuzzy_label(Y), yhat)


def fuzzy_margin_loss(kind: str, w: float, y, s: float) -> float:
    """Margin loss against a discounted binary label with confidence ``w``."""
    kind = loss_kind(kind)
    if not 0.0 <= w <= 1.0:
        raise ValueError("confidence w must lie in [0, 1]")
    y = normalize_label(y)
    loss, _, _ = fuzzy_margin_kernel(kind, float(y), float(w), float(s))
    return float(loss)


def shifted_margin_loss(kind: str, y, s: float, d: float) -> float:
    """Margin loss when the input is a box whose scores span ``[s-d, s+d]``."""
    if d < 0:
        raise ValueError("score radius must be nonnegative")
    return margin_loss(kind, y, float(s) + normalize_label(y) * float(d))


def fuzzy_datum_margin_loss(kind: str, Y: FuzzyDatum, s: float, d: float = 0.0) -> float:
    """Level-integrated margin loss of a binary (fuzzy) label datum."""
    from .dataset import binary_label_arrays

    y, w = binary_label_arrays([Y])
    loss, _, _ = fuzzy_margin_kernel(loss_kind(kind), y[0], w[0], float(s), float(d))
    return float(loss)


@dataclass(frozen=True)
class LossSpec:
    """Base loss plus generalization mode.

    ``mode="fuzzy"`` takes the set minimum on each cut and integrates over
    levels (set-valued data are the constant-cut special case);
    ``mode="gmli"`` uses the likelihood-based baseline losses.
    """

    base: str
    mode: str = "fuzzy"
    sigma: float = 1.0
    min_width: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "base", loss_kind(self.base))
        if self.mode not in ("fuzzy", "gmli"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "gmli" and self.base not in ("l2", "logistic"):
            raise ValueError("gmli is defined for the Gaussian (l2) and logistic cases")
        if self.sigma <= 0 or self.min_width <= 0:
            raise ValueError("sigma and min_width must be positive")

    @classmethod
    def parse(cls, text: str, **kw) -> "LossSpec":
        """``l1``, ``l2``, ``zero-one``, ``hinge``, ``logistic``, ``exponential``,
        ``gmli`` / ``gmli-interval`` (Gaussian), ``gmli-logistic``."""
        key = text.strip().lower()
        if key in ("gmli", "gmli-interval", "gmli_interval", "gmli-gaussian"):
            return cls("l2", "gmli", **kw)
        if key in ("gmli-logistic", "gmli_logistic"):
            return cls("logistic", "gmli", **kw)
        return cls(loss_kind(key), "fuzzy", **kw)

    @property
    def is_margin(self) -> bool:
        return self.base in MARGIN_LOSSES

    @property
    def differentiable(self) -> bool:
        return self.base != ZERO_ONE

    def check_kind(self, kind: str) -> None:
        if kind == "real" and self.base not in REAL_LOSSES:
            raise ValueError(f"loss {self.base} does not apply to real-valued outputs")
        if kind == "label" and self.base in REAL_LOSSES and self.mode == "fuzzy":
            raise ValueError(f"loss {self.base} does not apply to label outputs")
        if kind == "label" and self.mode == "gmli" and self.base != "logistic":
            raise ValueError("gmli on labels needs the logistic base loss")
        if kind == "real" and self.mode == "gmli" and self.base != "l2":
            raise ValueError("gmli on real outputs uses the Gaussian (l2) model")

    def __str__(self):
        if self.mode == "gmli":
            return "gmli-logistic" if self.base == "logistic" else "gmli-interval"
        return self.base
