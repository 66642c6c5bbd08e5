"""Simulated labeled datasets from known joint distributions.

Two generating processes are supported: intrinsic (label first, then a
score from the class Beta density) and extrinsic (score first from a Beta
mixture, then a label from a logistic calibration curve).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Union

import numpy as np
from scipy import stats

from .core import POSITIVE, PlattCurve, ScoredItem


@dataclass(frozen=True)
class IntrinsicSpec:
    alpha_pos: float
    beta_pos: float
    alpha_neg: float
    beta_neg: float
    prev: float

    def __post_init__(self):
        if min(self.alpha_pos, self.beta_pos, self.alpha_neg, self.beta_neg) <= 0:
            raise ValueError("Beta shape parameters must be positive")
        if not 0.0 <= self.prev <= 1.0:
            raise ValueError("prev must be in [0, 1]")


@dataclass(frozen=True)
class ExtrinsicSpec:
    w: float
    b: float
    alpha1: float
    beta1: float
    alpha2: float
    beta2: float
    lam: float

    def __post_init__(self):
        if min(self.alpha1, self.beta1, self.alpha2, self.beta2) <= 0:
            raise ValueError("Beta shape parameters must be positive")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must be in [0, 1]")

    @property
    def curve(self) -> PlattCurve:
        return PlattCurve(self.w, self.b)


Spec = Union[IntrinsicSpec, ExtrinsicSpec]


def _items(scores: np.ndarray, labels: np.ndarray) -> List[ScoredItem]:
    width = len(str(len(scores)))
    return [ScoredItem(f"item{i:0{width}d}", float(s), int(y))
            for i, (s, y) in enumerate(zip(np.clip(scores, 0.0, 1.0), labels))]


def simulate_intrinsic(spec: IntrinsicSpec, n: int, seed: int):
    """Array form of :func:`gen_intrinsic`: (scores, labels)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    labels = (rng.random(n) < spec.prev).astype(np.int64)
    pos = rng.beta(spec.alpha_pos, spec.beta_pos, size=n)
    neg = rng.beta(spec.alpha_neg, spec.beta_neg, size=n)
    scores = np.where(labels == POSITIVE, pos, neg)
    return np.clip(scores, 0.0, 1.0), labels


def simulate_extrinsic(spec: ExtrinsicSpec, n: int, seed: int):
    """Array form of :func:`gen_extrinsic`: (scores, labels)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    first = rng.random(n) < spec.lam
    c1 = rng.beta(spec.alpha1, spec.beta1, size=n)
    c2 = rng.beta(spec.alpha2, spec.beta2, size=n)
    scores = np.clip(np.where(first, c1, c2), 0.0, 1.0)
    labels = (rng.random(n) < spec.curve(scores)).astype(np.int64)
    return scores, labels


def gen_intrinsic(spec: IntrinsicSpec, n: int, seed: int) -> List[ScoredItem]:
    return _items(*simulate_intrinsic(spec, n, seed))


def gen_extrinsic(spec: ExtrinsicSpec, n: int, seed: int) -> List[ScoredItem]:
    return _items(*simulate_extrinsic(spec, n, seed))


def simulate(spec: Spec, n: int, seed: int):
    if isinstance(spec, IntrinsicSpec):
        return simulate_intrinsic(spec, n, seed)
    return simulate_extrinsic(spec, n, seed)


def generate(spec: Spec, n: int, seed: int) -> List[ScoredItem]:
    return _items(*simulate(spec, n, seed))


def true_prevalence_extrinsic(spec: ExtrinsicSpec, panels: int = 20_000) -> float:
    """E[Calib(C)] under the score mixture.

    Integrated by parts, E = Calib(1) - int_0^1 F(c) Calib'(c) dc with F the
    mixture CDF, so the integrand stays bounded even when a Beta density is
    singular at an end point; composite Simpson on ``panels`` panels.
    """
    if panels % 2:
        panels += 1
    x = np.linspace(0.0, 1.0, panels + 1)
    cdf = (spec.lam * stats.beta.cdf(x, spec.alpha1, spec.beta1)
           + (1.0 - spec.lam) * stats.beta.cdf(x, spec.alpha2, spec.beta2))
    p = spec.curve(x)
    slope = spec.w * p * (1.0 - p)
    wts = np.ones(panels + 1)
    wts[1:-1:2] = 4.0
    wts[2:-1:2] = 2.0
    integral = (cdf * slope) @ wts / (3.0 * panels)
    return float(p[-1] - integral)


def true_prevalence(spec: Spec) -> float:
    if isinstance(spec, IntrinsicSpec):
        return spec.prev
    return true_prevalence_extrinsic(spec)


# Simulation configurations used in the experiments: Beta(10,2)/Beta(2,5)
# class densities (strong) or Beta(7,6)/Beta(2,5) (weak) at 20% / 60%
# prevalence; logistic curves (25, -15) strong and (0.5, -1) weak over
# 0.2/0.6 mixtures of Beta(10,2) and Beta(2,5).
PRESETS: Dict[str, Spec] = {
    "intrinsic-strong-base": IntrinsicSpec(10, 2, 2, 5, 0.2),
    "intrinsic-strong-target": IntrinsicSpec(10, 2, 2, 5, 0.6),
    "intrinsic-weak-base": IntrinsicSpec(7, 6, 2, 5, 0.2),
    "intrinsic-weak-target": IntrinsicSpec(7, 6, 2, 5, 0.6),
    "extrinsic-strong-base": ExtrinsicSpec(25, -15, 10, 2, 2, 5, 0.2),
    "extrinsic-strong-target": ExtrinsicSpec(25, -15, 10, 2, 2, 5, 0.6),
    "extrinsic-weak-base": ExtrinsicSpec(0.5, -1, 10, 2, 2, 5, 0.2),
    "extrinsic-weak-target": ExtrinsicSpec(0.5, -1, 10, 2, 2, 5, 0.6),
}

CONFIGURATIONS = ("intrinsic-strong", "intrinsic-weak", "extrinsic-strong", "extrinsic-weak")


def preset(name: str) -> Spec:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
