"""Likelihood-based losses of generalized maximum-likelihood inference (GMLI).

Used as a baseline: an imprecise observation scores a model by the negative log
probability that the model's predictive distribution lands inside it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_ndtr, ndtr

from .fuzzy_sets import Interval, Precise, normalize_label
from .losses import margin_df, margin_f

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class DegenerateIntervalError(ValueError):
    """Interval too narrow: its probability mass, and hence the loss, blows up."""


@dataclass(frozen=True)
class GmliConfig:
    sigma: float = 1.0
    min_width: float = 1e-6

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.min_width <= 0:
            raise ValueError("min_width must be positive")


def log_interval_mass(z_lo, z_hi):
    """``log(Phi(z_hi) - Phi(z_lo))`` for ``z_lo < z_hi``, accurate in both tails."""
    z_lo, z_hi = np.broadcast_arrays(np.asarray(z_lo, float), np.asarray(z_hi, float))
    # reflect upper-tail intervals into the lower tail where log_ndtr is exact
    flip = z_lo > 0
    x = np.where(flip, -z_lo, z_hi)
    y = np.where(flip, -z_hi, z_lo)
    lx, ly = log_ndtr(x), log_ndtr(y)
    with np.errstate(divide="ignore"):
        tails = lx + np.log(-np.expm1(ly - lx))
    # an interval around the mean loses little mass; count the two tails
    # directly, or the smaller one vanishes next to 1
    outside = ndtr(z_lo) + ndtr(-z_hi)
    around = (z_lo < 0) & (z_hi > 0) & (outside < 0.5)
    return np.where(around, np.log1p(-np.minimum(outside, 0.5)), tails)


def interval_kernel(lo, hi, yhat, sigma: float = 1.0):
    """GMLI loss of intervals ``[lo, hi]`` and its derivative in ``yhat``."""
    z_lo = (np.asarray(lo, float) - yhat) / sigma
    z_hi = (np.asarray(hi, float) - yhat) / sigma
    log_p = log_interval_mass(z_lo, z_hi)
    dens_hi = np.exp(-0.5 * z_hi ** 2 - _LOG_SQRT_2PI - log_p)
    dens_lo = np.exp(-0.5 * z_lo ** 2 - _LOG_SQRT_2PI - log_p)
    return -log_p, (dens_hi - dens_lo) / sigma


def gaussian_kernel(y, yhat, sigma: float = 1.0):
    """Negative log density of a precise observation under N(yhat, sigma^2)."""
    z = (np.asarray(y, float) - yhat) / sigma
    return 0.5 * z * z + math.log(sigma) + _LOG_SQRT_2PI, -z / sigma


def real_kernel(lo, hi, yhat, sigma: float = 1.0):
    """Interval loss where ``lo < hi``, Gaussian density loss where ``lo == hi``."""
    lo, hi, yhat = np.broadcast_arrays(*(np.asarray(z, float) for z in (lo, hi, yhat)))
    precise = lo == hi
    widen = np.where(precise, 1.0, 0.0)
    l_int, g_int = interval_kernel(lo - widen, hi + widen, yhat, sigma)
    l_pt, g_pt = gaussian_kernel(lo, yhat, sigma)
    return np.where(precise, l_pt, l_int), np.where(precise, g_pt, g_int)


def logistic_kernel(y, w, s):
    """``-log(1 - w * sigmoid(-ys))`` and its derivative in ``s``.

    Written as ``log(1 + e^{-t}) - log(1 + (1 - w) e^{-t})`` with ``t = ys``;
    the second term is exactly zero at ``w = 1``, so the loss then coincides
    bit-for-bit with the logistic loss.  At ``w = 0`` both terms agree and
    the result is set to an exact zero.
    """
    t = y * s
    w = np.asarray(w, float)
    with np.errstate(divide="ignore"):
        log_rest = np.log1p(-w)
    loss = margin_f("logistic", t) - np.logaddexp(0.0, log_rest - t)
    ds = y * (margin_df("logistic", t) + expit(log_rest - t))
    informative = w > 0
    return np.where(informative, loss, 0.0), np.where(informative, ds, 0.0)


def _interval(Y) -> Interval:
    if isinstance(Y, Interval):
        return Y
    lo, hi = Y
    return Interval(lo, hi)


def gmli_interval_loss(Y, yhat: float, cfg: GmliConfig = GmliConfig()) -> float:
    """Negative log probability that N(yhat, sigma^2) falls inside ``Y``."""
    if isinstance(Y, Precise):
        loss, _ = gaussian_kernel(Y.value, float(yhat), cfg.sigma)
        return float(loss)
    Y = _interval(Y)
    if Y.width < cfg.min_width:
        raise DegenerateIntervalError(
            f"interval [{Y.lo}, {Y.hi}] narrower than min_width={cfg.min_width}")
    loss, _ = interval_kernel(Y.lo, Y.hi, float(yhat), cfg.sigma)
    return float(loss)


def normalized_gmli_interval_loss(Y, yhat: float, cfg: GmliConfig = GmliConfig()) -> float:
    """GMLI interval loss minus its minimum, which sits at the midpoint."""
    Y = _interval(Y)
    return gmli_interval_loss(Y, yhat, cfg) - gmli_interval_loss(Y, Y.mid, cfg)


def gmli_logistic_loss(w: float, y, s: float) -> float:
    if not 0.0 <= w <= 1.0:
        raise ValueError("confidence w must lie in [0, 1]")
    y = normalize_label(y)
    loss, _ = logistic_kernel(float(y), float(w), float(s))
    return float(loss)
