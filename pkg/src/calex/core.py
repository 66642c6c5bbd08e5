"""Domain types: scored items, histograms, calibration curves and the two
interchangeable representations of a score/label joint distribution."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np


class DomainError(ValueError):
    """A score or probability outside [0, 1]."""


class ShapeError(ValueError):
    """Histograms with mismatched bin edges."""


class DegenerateClassError(ValueError):
    """Prevalence of exactly 0 or 1 where both classes are required."""


POSITIVE = 1
NEGATIVE = 0


@dataclass(frozen=True)
class ScoredItem:
    id: str
    score: float
    label: Optional[int] = None

    def __post_init__(self):
        if not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise DomainError(f"score {self.score!r} for item {self.id!r} is outside [0, 1]")
        if self.label is not None and self.label not in (POSITIVE, NEGATIVE):
            raise ValueError(f"label {self.label!r} for item {self.id!r} is not 0/1")


def scores_of(items: Sequence[ScoredItem]) -> np.ndarray:
    return np.fromiter((it.score for it in items), dtype=float, count=len(items))


def labels_of(items: Sequence[ScoredItem]) -> np.ndarray:
    """Labels as an int array; raises if any item is unlabeled."""
    out = np.empty(len(items), dtype=np.int64)
    for i, it in enumerate(items):
        if it.label is None:
            raise ValueError(f"item {it.id!r} has no label")
        out[i] = it.label
    return out


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def check_scores(scores) -> np.ndarray:
    s = np.asarray(scores, dtype=float)
    if s.ndim == 0:
        s = s.reshape(1)
    if not np.all(np.isfinite(s)) or np.any(s < 0.0) or np.any(s > 1.0):
        raise DomainError("scores must be finite and within [0, 1]")
    return s


def uniform_edges(bins: int) -> np.ndarray:
    if bins < 1:
        raise ValueError("bin count must be positive")
    return np.linspace(0.0, 1.0, bins + 1)


def bin_index(scores, edges) -> np.ndarray:
    """Bin of each score: right-open bins, the last bin closed at 1."""
    edges = np.asarray(edges, dtype=float)
    idx = np.searchsorted(edges, scores, side="right") - 1
    return np.clip(idx, 0, len(edges) - 2)


# --------------------------------------------------------------------------
# Histogram


@dataclass(frozen=True, eq=False)
class Histogram:
    edges: np.ndarray
    mass: np.ndarray

    def __post_init__(self):
        edges = _frozen(self.edges)
        mass = _frozen(self.mass)
        if edges.ndim != 1 or mass.ndim != 1 or len(edges) != len(mass) + 1:
            raise ShapeError("need B+1 edges for B masses")
        if len(mass) < 1:
            raise ShapeError("histogram needs at least one bin")
        if edges[0] != 0.0 or edges[-1] != 1.0 or np.any(np.diff(edges) <= 0):
            raise ValueError("edges must increase strictly from 0 to 1")
        if np.any(mass < 0) or not np.all(np.isfinite(mass)):
            raise ValueError("masses must be finite and nonnegative")
        total = mass.sum()
        if total != 0.0 and abs(total - 1.0) > 1e-9:
            raise ValueError(f"masses sum to {total}, expected 1")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "mass", mass)

    @property
    def bins(self) -> int:
        return len(self.mass)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def is_empty(self) -> bool:
        return not self.mass.any()

    def same_edges(self, other: "Histogram") -> bool:
        return self.edges.shape == other.edges.shape and np.array_equal(self.edges, other.edges)

    def mass_at_or_above(self, threshold: float) -> float:
        """Mass of bins whose midpoint is at or above ``threshold``."""
        return float(self.mass[self.centers >= threshold].sum())

    def __eq__(self, other):
        if not isinstance(other, Histogram):
            return NotImplemented
        return self.same_edges(other) and np.array_equal(self.mass, other.mass)

    __hash__ = None


def _require_nonempty(*hists: Histogram):
    for h in hists:
        if h.is_empty:
            raise ValueError("empty histogram")


def _require_same_edges(a: Histogram, b: Histogram):
    if not a.same_edges(b):
        raise ShapeError("histograms have different bin edges")


def normalized(edges, weights) -> Histogram:
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if total <= 0:
        raise ValueError("cannot normalize zero total weight")
    return Histogram(edges, w / total)


def histogram_of(scores, bins: Union[int, Sequence[float], np.ndarray] = 20) -> Histogram:
    """Normalized histogram of scores. ``bins`` is a count of equal-width bins
    or an explicit edge array."""
    s = check_scores(scores)
    if s.size == 0:
        raise ValueError("no scores")
    edges = uniform_edges(bins) if np.ndim(bins) == 0 else np.asarray(bins, dtype=float)
    counts = np.bincount(bin_index(s, edges), minlength=len(edges) - 1)
    return Histogram(edges, counts / s.size)


def mix(f_pos: Histogram, f_neg: Histogram, p: float) -> Histogram:
    _require_same_edges(f_pos, f_neg)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"mixture weight {p} outside [0, 1]")
    if p == 1.0:
        return f_pos
    if p == 0.0:
        return f_neg
    return Histogram(f_pos.edges, p * f_pos.mass + (1.0 - p) * f_neg.mass)


def hellinger(h1: Histogram, h2: Histogram) -> float:
    _require_same_edges(h1, h2)
    d = np.sqrt(h1.mass) - np.sqrt(h2.mass)
    return float(min(1.0, math.sqrt(float(d @ d) / 2.0)))


# --------------------------------------------------------------------------
# Calibration curves
#
# Every curve is callable on an array of scores (no domain check); use
# eval_curve() for the checked scalar entry point.


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    # two-branch form avoids overflow in exp
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logit(p):
    p = np.asarray(p, dtype=float)
    return np.log(p) - np.log1p(-p)


@dataclass(frozen=True)
class IdentityCurve:
    kind = "identity"

    def __call__(self, s):
        return np.asarray(s, dtype=float)

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class PlattCurve:
    """P(y=1 | s) = 1 / (1 + exp(-(w*s + b)))."""

    w: float
    b: float
    kind = "platt"

    def __call__(self, s):
        return sigmoid(self.w * np.asarray(s, dtype=float) + self.b)

    def to_dict(self):
        return {"kind": self.kind, "w": float(self.w), "b": float(self.b)}


@dataclass(frozen=True)
class TemperatureCurve:
    t: float
    clip_epsilon: float = 1e-6
    kind = "temperature"

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("temperature must be positive")
        if not 0 < self.clip_epsilon < 0.5:
            raise ValueError("clip_epsilon must be in (0, 0.5)")

    def __call__(self, s):
        eps = self.clip_epsilon
        c = np.clip(np.asarray(s, dtype=float), eps, 1.0 - eps)
        return sigmoid(logit(c) / self.t)

    def to_dict(self):
        return {"kind": self.kind, "t": float(self.t), "clip_epsilon": float(self.clip_epsilon)}


@dataclass(frozen=True)
class StepCurve:
    threshold: float
    p_below: float
    p_above: float
    kind = "step"

    def __post_init__(self):
        for v in (self.threshold, self.p_below, self.p_above):
            if not 0.0 <= v <= 1.0:
                raise DomainError("step curve parameters must be in [0, 1]")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(s >= self.threshold, self.p_above, self.p_below).astype(float)

    def to_dict(self):
        return {"kind": self.kind, "threshold": self.threshold,
                "p_below": self.p_below, "p_above": self.p_above}


@dataclass(frozen=True, eq=False)
class BinnedCurve:
    edges: np.ndarray
    probs: np.ndarray
    kind = "binned"

    def __post_init__(self):
        edges, probs = _frozen(self.edges), _frozen(self.probs)
        if len(edges) != len(probs) + 1:
            raise ShapeError("need B+1 edges for B probabilities")
        if np.any(probs < 0) or np.any(probs > 1):
            raise DomainError("binned probabilities must be in [0, 1]")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "probs", probs)

    def __call__(self, s):
        return self.probs[bin_index(np.asarray(s, dtype=float), self.edges)]

    def to_dict(self):
        return {"kind": self.kind, "edges": self.edges.tolist(), "probs": self.probs.tolist()}


@dataclass(frozen=True, eq=False)
class IsotonicCurve:
    """Stepwise-constant monotone curve. ``breakpoints[i]`` is the lowest
    score of block i; scores below the first breakpoint take the first
    block's value."""

    breakpoints: np.ndarray
    values: np.ndarray
    kind = "isotonic"

    def __post_init__(self):
        bp, vals = _frozen(self.breakpoints), _frozen(self.values)
        if len(bp) != len(vals) or len(bp) == 0:
            raise ShapeError("isotonic curve needs matching, nonempty breakpoint/value lists")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must increase strictly")
        if np.any(np.diff(vals) < 0):
            raise ValueError("isotonic values must be nondecreasing")
        if np.any(vals < 0) or np.any(vals > 1):
            raise DomainError("isotonic values must be in [0, 1]")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    def __call__(self, s):
        idx = np.searchsorted(self.breakpoints, np.asarray(s, dtype=float), side="right") - 1
        return self.values[np.clip(idx, 0, len(self.values) - 1)]

    def to_dict(self):
        return {"kind": self.kind, "breakpoints": self.breakpoints.tolist(),
                "values": self.values.tolist()}


CalibrationCurve = Union[IdentityCurve, PlattCurve, TemperatureCurve, StepCurve, BinnedCurve, IsotonicCurve]


def curve_from_dict(d: dict) -> CalibrationCurve:
    kind = d.get("kind")
    if kind == "identity":
        return IdentityCurve()
    if kind == "platt":
        return PlattCurve(float(d["w"]), float(d["b"]))
    if kind == "temperature":
        return TemperatureCurve(float(d["t"]), float(d.get("clip_epsilon", 1e-6)))
    if kind == "step":
        return StepCurve(float(d["threshold"]), float(d["p_below"]), float(d["p_above"]))
    if kind == "binned":
        return BinnedCurve(d["edges"], d["probs"])
    if kind == "isotonic":
        return IsotonicCurve(d["breakpoints"], d["values"])
    raise ValueError(f"unknown curve kind {kind!r}")


def eval_curve(curve: CalibrationCurve, score: float) -> float:
    if not (math.isfinite(score) and 0.0 <= score <= 1.0):
        raise DomainError(f"score {score!r} outside [0, 1]")
    return float(curve(np.array([score]))[0])


# --------------------------------------------------------------------------
# Joint distributions


@dataclass(frozen=True)
class JointDistribution:
    """Score density plus calibration curve."""

    density: Histogram
    curve: CalibrationCurve

    def curve_at_centers(self) -> np.ndarray:
        return self.curve(self.density.centers)

    def to_dict(self) -> dict:
        return {"edges": self.density.edges.tolist(), "mass": self.density.mass.tolist(),
                "curve": self.curve.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "JointDistribution":
        return cls(Histogram(d["edges"], d["mass"]), curve_from_dict(d["curve"]))


@dataclass(frozen=True)
class ClassConditionals:
    """Prevalence plus the two class-conditional score densities."""

    f_pos: Histogram
    f_neg: Histogram
    prevalence: float

    def __post_init__(self):
        _require_same_edges(self.f_pos, self.f_neg)
        if not 0.0 <= self.prevalence <= 1.0:
            raise DomainError("prevalence outside [0, 1]")

    @property
    def edges(self) -> np.ndarray:
        return self.f_pos.edges

    def to_dict(self) -> dict:
        return {"edges": self.edges.tolist(), "f_pos": self.f_pos.mass.tolist(),
                "f_neg": self.f_neg.mass.tolist(), "prevalence": float(self.prevalence)}

    @classmethod
    def from_dict(cls, d: dict) -> "ClassConditionals":
        return cls(Histogram(d["edges"], d["f_pos"]), Histogram(d["edges"], d["f_neg"]),
                   float(d["prevalence"]))


def prevalence_of(joint: JointDistribution) -> float:
    _require_nonempty(joint.density)
    p = float(joint.density.mass @ joint.curve_at_centers())
    return min(1.0, max(0.0, p))


def to_class_conditionals(joint: JointDistribution) -> ClassConditionals:
    _require_nonempty(joint.density)
    q = joint.curve_at_centers()
    pos = joint.density.mass * q
    neg = joint.density.mass * (1.0 - q)
    if pos.sum() <= 0 or neg.sum() <= 0:
        raise DegenerateClassError("prevalence is 0 or 1; one class-conditional density is undefined")
    edges = joint.density.edges
    return ClassConditionals(normalized(edges, pos), normalized(edges, neg), prevalence_of(joint))


def from_class_conditionals(cc: ClassConditionals) -> JointDistribution:
    if not 0.0 < cc.prevalence < 1.0:
        raise DegenerateClassError("prevalence must be strictly inside (0, 1)")
    _require_nonempty(cc.f_pos, cc.f_neg)
    density = mix(cc.f_pos, cc.f_neg, cc.prevalence)
    d = density.mass
    probs = np.full(d.shape, 0.5)
    nz = d > 0
    probs[nz] = np.clip(cc.prevalence * cc.f_pos.mass[nz] / d[nz], 0.0, 1.0)
    return JointDistribution(density, BinnedCurve(density.edges, probs))
