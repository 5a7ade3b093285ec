"""Synthetic two-Gaussian classification experiments with corrupted labels.

Two settings are reproduced: missing labels (semi-supervised) and symmetric
label noise.  Three learners are compared on every repetition:

* ``fuzzy``    -- fuzzy logistic margin loss on the fuzzy labels;
* ``gmli``     -- the GMLI logistic loss on the same fuzzy labels;
* ``standard`` -- logistic regression on the labeled / observed labels only.

Error rates are exact, from the known class-conditional Gaussians.
Repetitions share nothing but the config; rep ``r`` draws its sample, its
corruption uniforms and its initial parameters from ``SeedSequence(seed, (r,))``,
so every method sees the same data and starts, and corruption sets are nested
across the gamma grid.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import ndtr

from .dataset import Example, Packed, label_examples
from .fuzzy_sets import CrispLabel, FuzzyLabel, as_fuzzy_label
from .losses import LossSpec
from .models import LinearModel
from .optimize import OptimizerConfig, descend, initial_params, take_rows
from .risk import RiskConfig

log = logging.getLogger(__name__)

METHODS = ("fuzzy", "gmli", "standard")
SEMI_GAMMAS = tuple(round(0.1 * k, 2) for k in range(10))
NOISE_GAMMAS = tuple(round(0.05 * k, 2) for k in range(10))

# Larger step and looser stopping than plain ``fit``: the logistic curvature of
# this problem is bounded by 0.75, so lr=2 is stable, and error rates settle long
# before the gradient reaches 1e-6.  Separable subsamples never converge and
# run to max_iters.
EXPERIMENT_OPTIMIZER = OptimizerConfig(learning_rate=2.0, max_iters=2000, grad_tol=1e-5,
                                       restarts=10, init_scale=1.0)


@dataclass(frozen=True)
class ExperimentConfig:
    n_per_class: int = 100
    mu_plus: tuple = (1.0, 1.0)
    mu_minus: tuple = (-1.0, -1.0)
    covariance: float = 1.0
    gamma_grid: tuple | None = None
    repetitions: int = 200
    seed: int = 0
    methods: tuple = METHODS
    optimizer: OptimizerConfig = EXPERIMENT_OPTIMIZER

    def __post_init__(self):
        if self.repetitions < 1 or self.n_per_class < 1:
            raise ValueError("repetitions and n_per_class must be positive")
        if self.covariance <= 0:
            raise ValueError("covariance scale must be positive")
        if self.gamma_grid is not None:
            object.__setattr__(self, "gamma_grid", tuple(float(g) for g in self.gamma_grid))
            if not all(0.0 <= g < 1.0 for g in self.gamma_grid):
                raise ValueError("gamma must lie in [0, 1)")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        object.__setattr__(self, "mu_plus", tuple(map(float, self.mu_plus)))
        object.__setattr__(self, "mu_minus", tuple(map(float, self.mu_minus)))
        object.__setattr__(self, "methods", tuple(self.methods))

    def gammas(self, which: str) -> tuple:
        if self.gamma_grid is not None:
            return self.gamma_grid
        return SEMI_GAMMAS if _which(which) == "semi" else NOISE_GAMMAS

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        obj = dict(obj)
        opt = obj.pop("optimizer", None)
        known = {f.name for f in fields(cls)}
        bad = set(obj) - known
        if bad:
            raise ValueError(f"unknown config keys {sorted(bad)}")
        for key in ("mu_plus", "mu_minus", "gamma_grid", "methods"):
            if obj.get(key) is not None:
                obj[key] = tuple(obj[key])
        cfg = cls(**obj)
        if opt:
            cfg = replace(cfg, optimizer=replace(EXPERIMENT_OPTIMIZER, **opt))
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class CurvePoint:
    gamma: float
    method: str
    mean_error: float
    stderr: float
    repetitions: int
    errors: np.ndarray | None = field(default=None, repr=False)
    params: np.ndarray | None = field(default=None, repr=False)


def _which(which: str) -> str:
    key = which.strip().lower()
    if key in ("semi", "semi-supervised", "semi_supervised", "missing"):
        return "semi"
    if key in ("noise", "label-noise", "label_noise", "flip"):
        return "noise"
    raise ValueError(f"unknown experiment {which!r}")


# -- data -------------------------------------------------------------------------

def _rep_streams(seed: int, rep: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed, spawn_key=(rep,)).spawn(3)
    return [np.random.default_rng(c) for c in children]


def sample_arrays(cfg: ExperimentConfig, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Positives first, then negatives; labels are +1 / -1."""
    n = cfg.n_per_class
    scale = np.sqrt(cfg.covariance)
    pos = np.asarray(cfg.mu_plus) + scale * rng.standard_normal((n, 2))
    neg = np.asarray(cfg.mu_minus) + scale * rng.standard_normal((n, 2))
    return np.vstack([pos, neg]), np.concatenate([np.ones(n), -np.ones(n)])


def generate_sample(cfg: ExperimentConfig, seed: int) -> list[Example]:
    X, y = sample_arrays(cfg, np.random.default_rng(seed))
    return label_examples(X, [CrispLabel(int(v)) for v in y])


def _crisp_labels(data: Sequence[Example]) -> np.ndarray:
    out = []
    for e in data:
        mu = as_fuzzy_label(e.y).memberships
        top = [k for k, v in mu.items() if v == 1.0]
        if len(top) != 1:
            raise ValueError("corruption needs crisply labeled data")
        out.append(float(top[0]))
    return np.array(out)


def mask_labels(data: Sequence[Example], gamma: float, seed: int) -> list[Example]:
    """Each label is replaced, with probability ``gamma``, by full ignorance."""
    data = list(data)
    _crisp_labels(data)
    hit = np.random.default_rng(seed).random(len(data)) < gamma
    return [Example(e.x, FuzzyLabel.unknown() if h else e.y) for e, h in zip(data, hit)]


def flip_labels(data: Sequence[Example], gamma: float, seed: int) -> tuple[list[Example], np.ndarray]:
    """Flip each label with probability ``gamma``; the observed label gets degree
    1 and the other one degree ``gamma``.  Returns the fuzzy data and the truth."""
    data = list(data)
    truth = _crisp_labels(data)
    hit = np.random.default_rng(seed).random(len(data)) < gamma
    observed = np.where(hit, -truth, truth)
    out = [Example(e.x, FuzzyLabel.discounted(int(o), 1.0 - gamma)) for e, o in zip(data, observed)]
    return out, truth.astype(int)


def exact_error_rates(params: np.ndarray, cfg: ExperimentConfig) -> np.ndarray:
    """Misclassification probability of linear classifiers ``[w1, w2, b]`` (rows)."""
    params = np.atleast_2d(params)
    w, b = params[:, :-1], params[:, -1]
    norm = np.sqrt((w * w).sum(axis=1) * cfg.covariance)
    safe = np.where(norm > 0, norm, 1.0)
    err_pos = ndtr(-(w @ np.asarray(cfg.mu_plus) + b) / safe)
    err_neg = ndtr((w @ np.asarray(cfg.mu_minus) + b) / safe)
    return np.where(norm > 0, 0.5 * err_pos + 0.5 * err_neg, 0.5)


def exact_error_rate(model: LinearModel, cfg: ExperimentConfig = ExperimentConfig()) -> float:
    return float(exact_error_rates(model.params, cfg)[0])


def bayes_error(cfg: ExperimentConfig = ExperimentConfig()) -> float:
    diff = np.asarray(cfg.mu_plus) - np.asarray(cfg.mu_minus)
    return float(ndtr(-0.5 * np.linalg.norm(diff) / np.sqrt(cfg.covariance)))


# -- runner -------------------------------------------------------------------

def _method_problem(which: str, method: str, gamma: float, X, y, u) -> tuple[Packed, LossSpec]:
    """Stacked problem ``(G, n, ...)`` for one method at one corruption level."""
    hit = u < gamma
    G, n = y.shape
    ones = np.ones((G, n))
    if which == "semi":
        obs, conf = y, np.where(hit, 0.0, 1.0)
        std_weight = (~hit).astype(float)
    else:
        obs, conf = np.where(hit, -y, y), np.full((G, n), 1.0 - gamma)
        std_weight = ones
    if method == "standard":
        P = Packed("label", X, np.zeros_like(X), std_weight, y=obs, w=ones)
        return P, LossSpec("logistic")
    P = Packed("label", X, np.zeros_like(X), ones, y=obs, w=conf)
    return P, LossSpec("logistic", "gmli" if method == "gmli" else "fuzzy")


def _fit_stacked(P: Packed, spec: LossSpec, theta0: np.ndarray, opt: OptimizerConfig) -> np.ndarray:
    """Best-of-restarts parameters per group; ``theta0`` is ``(G, R, p+1)``."""
    G, R, dim = theta0.shape
    out = np.zeros((G, dim))
    informative = P.weight.sum(axis=1) > 0
    if spec.mode == "gmli":
        informative &= (P.weight * (P.w > 0)).sum(axis=1) > 0
    groups = np.flatnonzero(informative)
    if groups.size == 0:
        return out
    rows = np.repeat(groups, R)
    res = descend(theta0[groups].reshape(-1, dim), take_rows(P, rows), spec, RiskConfig(), opt)
    risk = res["risk"].reshape(groups.size, R)
    best = np.argmin(risk, axis=1)
    out[groups] = res["theta"].reshape(groups.size, R, dim)[np.arange(groups.size), best]
    return out


def run_experiment(which: str, cfg: ExperimentConfig = ExperimentConfig()) -> list[CurvePoint]:
    """Mean exact error per (gamma, method) over ``cfg.repetitions`` runs."""
    which = _which(which)
    opt = cfg.optimizer
    G, n = cfg.repetitions, 2 * cfg.n_per_class
    X = np.empty((G, n, 2))
    y = np.empty((G, n))
    u = np.empty((G, n))
    theta0 = np.empty((G, opt.restarts, 3))
    for r in range(G):
        s_rng, c_rng, i_rng = _rep_streams(cfg.seed, r)
        X[r], y[r] = sample_arrays(cfg, s_rng)
        u[r] = c_rng.random(n)
        theta0[r] = initial_params(i_rng, opt.restarts, 2, opt.init_scale)

    points = []
    for gamma in cfg.gammas(which):
        for method in cfg.methods:
            t0 = time.perf_counter()
            P, spec = _method_problem(which, method, gamma, X, y, u)
            params = _fit_stacked(P, spec, theta0, opt)
            errors = exact_error_rates(params, cfg)
            stderr = float(errors.std(ddof=1) / np.sqrt(G)) if G > 1 else 0.0
            points.append(CurvePoint(gamma, method, float(errors.mean()), stderr, G, errors, params))
            log.info("%s gamma=%.2f %-8s error=%.4f +- %.4f (%.1fs)", which, gamma, method,
                     errors.mean(), stderr, time.perf_counter() - t0)
    return points


CSV_HEADER = ("gamma", "method", "mean_error", "stderr", "repetitions")


def curve_csv(points: Sequence[CurvePoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p in points:
        writer.writerow([f"{p.gamma:g}", p.method, f"{p.mean_error:.6f}", f"{p.stderr:.6f}", p.repetitions])
    return buf.getvalue()


def write_curve_csv(points: Sequence[CurvePoint], path) -> None:
    Path(path).write_text(curve_csv(points))
