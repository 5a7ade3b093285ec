"""Imprecise and fuzzy observations: precise values, intervals, trapezoids, fuzzy labels.

Every datum is an immutable value object.  Real-valued data share a single
trapezoidal view ``(a, b, c, d)`` (support ``[a, d]``, core ``[b, c]``), so a
precise number, an interval and a triangle are all degenerate trapezoids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping, Union

#: smallest level used when a support is requested; the open support itself is
#: not the cut of any level in (0, 1]
SUPPORT_ALPHA = 1e-9

Label = Union[int, str]


def normalize_label(value: Any) -> Label:
    """Map the binary encodings ``"+1"``, ``"1"``, ``1``, ``"-1"``, ``-1`` to ints.

    Anything else is kept as a string label of an abstract alphabet.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not labels")
    if isinstance(value, (int, float)):
        if value in (1, -1):
            return int(value)
        raise ValueError(f"numeric label must be +1 or -1, got {value!r}")
    text = str(value).strip()
    if text in ("+1", "1"):
        return 1
    if text == "-1":
        return -1
    return text


def label_to_json(label: Label) -> str:
    if label == 1:
        return "+1"
    if label == -1:
        return "-1"
    return str(label)


def _check_level(alpha: float) -> None:
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"level must lie in (0, 1], got {alpha!r}")


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("interval endpoints must be finite")
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def rad(self) -> float:
        return 0.5 * (self.hi - self.lo)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, v: float) -> bool:
        return self.lo <= v <= self.hi

    def issubset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def clamp(self, v: float) -> float:
        return min(max(v, self.lo), self.hi)


@dataclass(frozen=True)
class Precise:
    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v):
            raise ValueError("precise value must be finite")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class Trapezoid:
    """Trapezoidal fuzzy number with support ``[a, d]`` and core ``[b, c]``."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        vals = [float(v) for v in (self.a, self.b, self.c, self.d)]
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("trapezoid parameters must be finite")
        if not vals[0] <= vals[1] <= vals[2] <= vals[3]:
            raise ValueError(f"need a <= b <= c <= d, got {vals}")
        for name, v in zip("abcd", vals):
            object.__setattr__(self, name, v)

    @classmethod
    def triangular(cls, left: float, peak: float, right: float) -> "Trapezoid":
        return cls(left, peak, peak, right)

    @classmethod
    def symmetric(cls, center: float, core_halfwidth: float, support_halfwidth: float) -> "Trapezoid":
        """Core ``[y-eps, y+eps]`` and support ``[y-delta, y+delta]``."""
        return cls(center - support_halfwidth, center - core_halfwidth,
                   center + core_halfwidth, center + support_halfwidth)

    @property
    def core(self) -> Interval:
        return Interval(self.b, self.c)


@dataclass(frozen=True)
class CrispLabel:
    value: Label

    def __post_init__(self):
        object.__setattr__(self, "value", normalize_label(self.value))


@dataclass(frozen=True)
class FuzzyLabel:
    """Normalized possibility distribution over a finite label alphabet.

    Labels absent from ``memberships`` have degree 0.
    """

    memberships: Mapping[Label, float] = field(default_factory=dict)

    def __post_init__(self):
        degrees = {normalize_label(k): float(v) for k, v in dict(self.memberships).items()}
        if not degrees:
            raise ValueError("fuzzy label needs at least one label")
        for k, v in degrees.items():
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"degree of {k!r} outside [0, 1]: {v}")
        if max(degrees.values()) != 1.0:
            raise ValueError("fuzzy label must be normalized (some degree equal to 1)")
        object.__setattr__(self, "memberships", MappingProxyType(degrees))

    @classmethod
    def discounted(cls, observed: Label, confidence: float, alphabet=(1, -1)) -> "FuzzyLabel":
        """Degree 1 on ``observed`` and ``1 - confidence`` on every other label."""
        if not 0.0 <= confidence <= 1.0:
            raise ValueError("confidence must lie in [0, 1]")
        observed = normalize_label(observed)
        degrees = {normalize_label(k): 1.0 - confidence for k in alphabet}
        degrees[observed] = 1.0
        return cls(degrees)

    @classmethod
    def unknown(cls, alphabet=(1, -1)) -> "FuzzyLabel":
        return cls({k: 1.0 for k in alphabet})

    def __hash__(self):
        return hash(tuple(sorted(self.memberships.items(), key=lambda kv: str(kv[0]))))

    def __eq__(self, other):
        if not isinstance(other, FuzzyLabel):
            return NotImplemented
        return dict(self.memberships) == dict(other.memberships)


FuzzyDatum = Union[Precise, Interval, Trapezoid, CrispLabel, FuzzyLabel]
RealDatum = Union[Precise, Interval, Trapezoid]


def is_label_kind(datum: FuzzyDatum) -> bool:
    return isinstance(datum, (CrispLabel, FuzzyLabel))


def as_trapezoid(datum: RealDatum | float) -> Trapezoid:
    """Real-valued datum viewed as a (possibly degenerate) trapezoid."""
    if isinstance(datum, Trapezoid):
        return datum
    if isinstance(datum, Interval):
        return Trapezoid(datum.lo, datum.lo, datum.hi, datum.hi)
    if isinstance(datum, Precise):
        v = datum.value
        return Trapezoid(v, v, v, v)
    if isinstance(datum, (int, float)) and not isinstance(datum, bool):
        v = float(datum)
        return Trapezoid(v, v, v, v)
    raise TypeError(f"not a real-valued datum: {datum!r}")


def as_fuzzy_label(datum: CrispLabel | FuzzyLabel) -> FuzzyLabel:
    if isinstance(datum, FuzzyLabel):
        return datum
    if isinstance(datum, CrispLabel):
        return FuzzyLabel({datum.value: 1.0})
    raise TypeError(f"not a label datum: {datum!r}")


def membership(datum: FuzzyDatum, v) -> float:
    """Degree to which ``v`` belongs to ``datum``."""
    if is_label_kind(datum):
        if isinstance(v, float) and not float(v).is_integer():
            raise TypeError("real value queried against a label datum")
        return float(as_fuzzy_label(datum).memberships.get(normalize_label(v), 0.0))
    if isinstance(v, str):
        raise TypeError("label queried against a real-valued datum")
    t = as_trapezoid(datum)
    v = float(v)
    if v < t.a or v > t.d:
        return 0.0
    if t.b <= v <= t.c:
        return 1.0
    if v < t.b:
        return (v - t.a) / (t.b - t.a)
    return (t.d - v) / (t.d - t.c)


def alpha_cut(datum: FuzzyDatum, alpha: float):
    """Crisp set ``{v : membership(datum, v) >= alpha}``.

    Real data give a closed :class:`Interval`; label data give a frozenset.
    """
    _check_level(alpha)
    if is_label_kind(datum):
        degrees = as_fuzzy_label(datum).memberships
        return frozenset(k for k, mu in degrees.items() if mu >= alpha)
    t = as_trapezoid(datum)
    lo = t.a + alpha * (t.b - t.a)
    hi = t.d - alpha * (t.d - t.c)
    # rounding may push the two ends past the core
    return Interval(min(lo, t.b), max(hi, t.c))


def support(datum: FuzzyDatum, min_alpha: float = SUPPORT_ALPHA):
    return alpha_cut(datum, min_alpha)


def core(datum: FuzzyDatum):
    return alpha_cut(datum, 1.0)


# -- JSON -------------------------------------------------------------------

def datum_from_json(obj: Any) -> FuzzyDatum:
    """Parse one of ``{"real": v}``, ``{"interval": [lo, hi]}``,
    ``{"trap": [a, b, c, d]}``, ``{"label": "+1"}``, ``{"flabel": {...}}``."""
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return Precise(obj)
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValueError(f"malformed fuzzy datum: {obj!r}")
    (tag, payload), = obj.items()
    if tag == "real":
        return Precise(payload)
    if tag == "interval":
        lo, hi = payload
        return Interval(lo, hi)
    if tag == "trap":
        return Trapezoid(*payload)
    if tag == "label":
        return CrispLabel(payload)
    if tag == "flabel":
        return FuzzyLabel(payload)
    raise ValueError(f"unknown fuzzy datum tag {tag!r}")


def datum_to_json(datum: FuzzyDatum) -> dict:
    if isinstance(datum, Precise):
        return {"real": datum.value}
    if isinstance(datum, Interval):
        return {"interval": [datum.lo, datum.hi]}
    if isinstance(datum, Trapezoid):
        return {"trap": [datum.a, datum.b, datum.c, datum.d]}
    if isinstance(datum, CrispLabel):
        return {"label": label_to_json(datum.value)}
    if isinstance(datum, FuzzyLabel):
        return {"flabel": {label_to_json(k): v for k, v in datum.memberships.items()}}
    raise TypeError(f"not a fuzzy datum: {datum!r}")
