"""Training records and the JSON-lines dataset format.

One record per line::

    {"x": [1.0, {"lo": 0.0, "hi": 1.0}], "y": {"interval": [3, 7]}}

Input coordinates are numbers or ``{"lo", "hi"}`` boxes; ``{"trap": [...]}``
coordinates are also accepted and make the input fuzzy.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .fuzzy_sets import (
    CrispLabel,
    FuzzyDatum,
    FuzzyLabel,
    Interval,
    Precise,
    Trapezoid,
    alpha_cut,
    as_fuzzy_label,
    as_trapezoid,
    datum_from_json,
    datum_to_json,
    is_label_kind,
)

Coordinate = Union[float, Interval, Trapezoid]


def _coord(value) -> Coordinate:
    if isinstance(value, (Interval, Trapezoid)):
        return value
    if isinstance(value, Precise):
        return value.value
    if isinstance(value, dict):
        if "lo" in value:
            return Interval(value["lo"], value["hi"])
        if "trap" in value:
            return Trapezoid(*value["trap"])
        raise ValueError(f"malformed input coordinate {value!r}")
    return float(value)


@dataclass(frozen=True)
class Example:
    x: tuple
    y: FuzzyDatum

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(_coord(v) for v in self.x))

    @property
    def dim(self) -> int:
        return len(self.x)

    @property
    def precise_input(self) -> bool:
        return all(isinstance(v, float) for v in self.x)

    @property
    def fuzzy_input(self) -> bool:
        return any(isinstance(v, Trapezoid) for v in self.x)

    def input_box(self, alpha: float = 1.0) -> list[Interval]:
        """Per-coordinate intervals of the input at level ``alpha``."""
        box = []
        for v in self.x:
            if isinstance(v, Trapezoid):
                box.append(alpha_cut(v, alpha))
            elif isinstance(v, Interval):
                box.append(v)
            else:
                box.append(Interval(v, v))
        return box

    def to_json(self) -> dict:
        xs = []
        for v in self.x:
            if isinstance(v, Interval):
                xs.append({"lo": v.lo, "hi": v.hi})
            elif isinstance(v, Trapezoid):
                xs.append({"trap": [v.a, v.b, v.c, v.d]})
            else:
                xs.append(v)
        return {"x": xs, "y": datum_to_json(self.y)}

    @classmethod
    def from_json(cls, obj: dict) -> "Example":
        return cls(tuple(obj["x"]), datum_from_json(obj["y"]))


def read_jsonl(path) -> list[Example]:
    examples = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                examples.append(Example.from_json(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return examples


def write_jsonl(examples: Iterable[Example], path) -> None:
    Path(path).write_text("".join(json.dumps(e.to_json()) + "\n" for e in examples))


def output_kind(examples: Sequence[Example]) -> str:
    if not examples:
        raise ValueError("empty dataset")
    kinds = {"label" if is_label_kind(e.y) else "real" for e in examples}
    if len(kinds) > 1:
        raise ValueError("dataset mixes real-valued and label outputs")
    dims = {e.dim for e in examples}
    if len(dims) > 1:
        raise ValueError(f"inconsistent input dimensions {sorted(dims)}")
    return kinds.pop()


@dataclass
class Packed:
    """Array view of a homogeneous dataset.

    Inputs are stored as box centres and radii, shape ``(..., n, p)``.  When
    some coordinate is fuzzy the per-level boxes live in ``x_mid_lv`` /
    ``x_rad_lv`` with shape ``(K, n, p)`` for the level grid ``alphas``.
    Real outputs are trapezoid parameters ``a, b, c, d``; binary label outputs
    are the most plausible label ``y`` and its confidence ``w`` (one minus the
    degree of the other label).  ``weight`` masks examples out of the average.
    """

    kind: str
    x_mid: np.ndarray
    x_rad: np.ndarray
    weight: np.ndarray
    a: np.ndarray | None = None
    b: np.ndarray | None = None
    c: np.ndarray | None = None
    d: np.ndarray | None = None
    y: np.ndarray | None = None
    w: np.ndarray | None = None
    alphas: np.ndarray | None = None
    x_mid_lv: np.ndarray | None = None
    x_rad_lv: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.x_mid.shape[-2]

    @property
    def p(self) -> int:
        return self.x_mid.shape[-1]

    @property
    def precise_input(self) -> bool:
        return self.x_mid_lv is None and not np.any(self.x_rad)

    @property
    def fuzzy_input(self) -> bool:
        return self.x_mid_lv is not None

    @property
    def precise_output(self) -> bool:
        if self.kind == "label":
            return bool(np.all(self.w == 1.0))
        return bool(np.all(self.a == self.d))


def binary_label_arrays(labels: Sequence[FuzzyDatum]) -> tuple[np.ndarray, np.ndarray]:
    """Most plausible label (ties -> +1) and confidence for binary fuzzy labels."""
    ys, ws = [], []
    for datum in labels:
        mu = as_fuzzy_label(datum).memberships
        if not set(mu) <= {1, -1}:
            raise ValueError(f"margin losses need labels in {{-1, +1}}, got {sorted(map(str, mu))}")
        pos, neg = mu.get(1, 0.0), mu.get(-1, 0.0)
        if pos == 1.0:
            ys.append(1.0)
            ws.append(1.0 - neg)
        else:
            ys.append(-1.0)
            ws.append(1.0 - pos)
    return np.array(ys), np.array(ws)


def pack(examples: Sequence[Example], alphas: np.ndarray | None = None) -> Packed:
    """Build the array view; ``alphas`` is needed only for fuzzy inputs."""
    kind = output_kind(examples)
    n, p = len(examples), examples[0].dim
    x_mid = np.empty((n, p))
    x_rad = np.empty((n, p))
    for i, e in enumerate(examples):
        for j, iv in enumerate(e.input_box(1.0)):
            x_mid[i, j], x_rad[i, j] = iv.mid, iv.rad
    packed = Packed(kind=kind, x_mid=x_mid, x_rad=x_rad, weight=np.ones(n))
    if any(e.fuzzy_input for e in examples):
        if alphas is None:
            raise ValueError("fuzzy inputs need a level grid")
        K = len(alphas)
        packed.alphas = np.asarray(alphas, dtype=float)
        packed.x_mid_lv = np.empty((K, n, p))
        packed.x_rad_lv = np.empty((K, n, p))
        for k, alpha in enumerate(packed.alphas):
            for i, e in enumerate(examples):
                for j, iv in enumerate(e.input_box(alpha)):
                    packed.x_mid_lv[k, i, j], packed.x_rad_lv[k, i, j] = iv.mid, iv.rad
    if kind == "real":
        traps = [as_trapezoid(e.y) for e in examples]
        packed.a = np.array([t.a for t in traps])
        packed.b = np.array([t.b for t in traps])
        packed.c = np.array([t.c for t in traps])
        packed.d = np.array([t.d for t in traps])
    else:
        packed.y, packed.w = binary_label_arrays([e.y for e in examples])
    return packed


def label_examples(X: np.ndarray, labels: Sequence[FuzzyDatum]) -> list[Example]:
    return [Example(tuple(float(v) for v in row), lab) for row, lab in zip(X, labels)]


__all__ = [
    "CrispLabel", "Example", "FuzzyLabel", "Packed", "binary_label_arrays",
    "label_examples", "output_kind", "pack", "read_jsonl", "write_jsonl",
]
