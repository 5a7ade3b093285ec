"""Linear scoring / regression model ``x -> w.x + b``."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .fuzzy_sets import Interval


@dataclass(frozen=True)
class LinearModel:
    weights: tuple
    bias: float = 0.0

    def __post_init__(self):
        w = tuple(float(v) for v in np.atleast_1d(np.asarray(self.weights, dtype=float)))
        if not all(np.isfinite(w)) or not np.isfinite(self.bias):
            raise ValueError("model parameters must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))

    @classmethod
    def from_params(cls, theta: np.ndarray) -> "LinearModel":
        """From a flat ``[w_1, ..., w_p, b]`` vector."""
        theta = np.asarray(theta, dtype=float)
        return cls(tuple(theta[:-1]), float(theta[-1]))

    @property
    def params(self) -> np.ndarray:
        return np.append(np.asarray(self.weights), self.bias)

    @property
    def dim(self) -> int:
        return len(self.weights)

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"model expects {self.dim} inputs, got {x.shape[-1]}")
        return x

    def predict_score(self, x) -> float | np.ndarray:
        x = self._check(x)
        s = x @ np.asarray(self.weights) + self.bias
        return float(s) if s.ndim == 0 else s

    __call__ = predict_score

    def classify(self, x) -> int | np.ndarray:
        """Sign of the score; a zero score counts as +1."""
        s = self.predict_score(x)
        if np.ndim(s) == 0:
            return 1 if s >= 0 else -1
        return np.where(s >= 0, 1, -1)

    def score_interval(self, box: Sequence[Interval]) -> Interval:
        """Exact range of the score over a box of per-coordinate intervals."""
        if len(box) != self.dim:
            raise ValueError(f"model expects {self.dim} inputs, got a {len(box)}-box")
        mid = np.array([iv.mid for iv in box])
        rad = np.array([iv.rad for iv in box])
        w = np.asarray(self.weights)
        s = float(w @ mid + self.bias)
        d = float(np.abs(w) @ rad)
        return Interval(s - d, s + d)

    def to_json(self) -> dict:
        return {"weights": list(self.weights), "bias": self.bias}

    @classmethod
    def from_json(cls, obj: dict) -> "LinearModel":
        return cls(tuple(obj["weights"]), obj["bias"])

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()) + "\n")

    @classmethod
    def load(cls, path) -> "LinearModel":
        return cls.from_json(json.loads(Path(path).read_text()))


def predict_score(model: LinearModel, x):
    return model.predict_score(x)


def classify(model: LinearModel, x):
    return model.classify(x)


def score_interval(model: LinearModel, box: Sequence[Interval]) -> Interval:
    return model.score_interval(box)
