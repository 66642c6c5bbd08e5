"""Prevalence estimators.

Counting family (pcc, cpcc, cc, acc) works on raw scores; the mixture model
and median sweep work on binned target densities against the base
class-conditional densities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    CalibrationCurve,
    ClassConditionals,
    Histogram,
    JointDistribution,
    ShapeError,
    check_scores,
    histogram_of,
    to_class_conditionals,
)


class UnstableThresholdError(ValueError):
    """tpr - fpr too close to zero for an adjusted count."""


TECHNIQUES = ("pcc", "cpcc", "cc", "acc", "mixture", "median_sweep")


@dataclass(frozen=True)
class TechniqueConfig:
    technique: str = "cpcc"
    threshold: float = 0.5
    grid_step: float = 0.001
    bins: int = 20
    denominator_guard: float = 0.05

    def __post_init__(self):
        if self.technique not in TECHNIQUES:
            raise ValueError(f"unknown technique {self.technique!r}; choose from {TECHNIQUES}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must be in [0, 1]")
        if not 0.0 < self.grid_step <= 0.5:
            raise ValueError("grid_step must be in (0, 0.5]")
        if self.bins < 1:
            raise ValueError("bins must be positive")
        if not 0.0 < self.denominator_guard < 1.0:
            raise ValueError("denominator_guard must be in (0, 1)")


def _nonempty(scores) -> np.ndarray:
    s = check_scores(scores)
    if s.size == 0:
        raise ValueError("no scores")
    return s


def estimate_pcc(scores) -> float:
    return float(np.mean(_nonempty(scores)))


def estimate_cpcc(scores, curve: CalibrationCurve) -> float:
    return float(np.mean(curve(_nonempty(scores))))


def estimate_cc(scores, threshold: float) -> float:
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be in [0, 1]")
    return float(np.mean(_nonempty(scores) >= threshold))


def adjust_count(above: float, tpr: float, fpr: float, guard: float = 0.05) -> float:
    """(above - fpr) / (tpr - fpr), clipped to [0, 1]."""
    denom = tpr - fpr
    if abs(denom) < guard:
        raise UnstableThresholdError(f"|tpr - fpr| = {abs(denom):.4g} below guard {guard}")
    return float(np.clip((above - fpr) / denom, 0.0, 1.0))


def rates_at(cc: ClassConditionals, threshold: float):
    """(tpr, fpr): class-conditional mass in bins whose midpoint is >= threshold."""
    return cc.f_pos.mass_at_or_above(threshold), cc.f_neg.mass_at_or_above(threshold)


def estimate_acc(scores, threshold: float, base_joint: JointDistribution, guard: float = 0.05) -> float:
    """Adjusted classify-and-count. Scores are binned on the base joint's
    edges so bin membership relative to the threshold matches the one used
    for tpr and fpr."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be in [0, 1]")
    cc = to_class_conditionals(base_joint)
    tpr, fpr = rates_at(cc, threshold)
    above = histogram_of(_nonempty(scores), cc.edges).mass_at_or_above(threshold)
    return adjust_count(above, tpr, fpr, guard)


def _check_target(target_hist: Histogram, base_cc: ClassConditionals):
    if not target_hist.same_edges(base_cc.f_pos):
        raise ShapeError("target histogram and base class-conditionals have different edges")
    if target_hist.is_empty:
        raise ValueError("empty target histogram")


def mixture_distances(target_hist: Histogram, base_cc: ClassConditionals, grid) -> np.ndarray:
    """Hellinger distance from the target to each p-mixture in ``grid``."""
    grid = np.asarray(grid, dtype=float)[:, None]
    mixed = grid * base_cc.f_pos.mass + (1.0 - grid) * base_cc.f_neg.mass
    d = np.sqrt(np.clip(mixed, 0.0, None)) - np.sqrt(target_hist.mass)
    return np.minimum(1.0, np.sqrt(np.sum(d * d, axis=1) / 2.0))


def prevalence_grid(grid_step: float) -> np.ndarray:
    n = int(np.floor(1.0 / grid_step + 1e-9))
    grid = np.arange(n + 1) * grid_step
    if grid[-1] < 1.0 - 1e-12:
        grid = np.append(grid, 1.0)
    return np.minimum(grid, 1.0)


def estimate_mixture(target_hist: Histogram, base_cc: ClassConditionals, grid_step: float = 0.001) -> float:
    """Grid search for the mixture weight whose implied score density is
    closest in Hellinger distance to the target; ties go to the smaller p."""
    _check_target(target_hist, base_cc)
    grid = prevalence_grid(grid_step)
    dist = mixture_distances(target_hist, base_cc, grid)
    return float(grid[int(np.argmin(dist))])  # argmin returns the first minimum


def median_sweep_estimates(target_hist: Histogram, base_cc: ClassConditionals, guard: float = 0.05):
    """Per-threshold adjusted estimates at each interior bin edge that
    passes the guard; returns (thresholds, estimates)."""
    _check_target(target_hist, base_cc)
    ts, ests = [], []
    for t in target_hist.edges[1:-1]:
        tpr, fpr = rates_at(base_cc, t)
        if abs(tpr - fpr) < guard:
            continue
        ts.append(float(t))
        ests.append(adjust_count(target_hist.mass_at_or_above(t), tpr, fpr, guard))
    return np.array(ts), np.array(ests)


def estimate_median_sweep(target_hist: Histogram, base_cc: ClassConditionals, guard: float = 0.05) -> float:
    _, ests = median_sweep_estimates(target_hist, base_cc, guard)
    if ests.size == 0:
        raise UnstableThresholdError("no threshold passes the denominator guard")
    return float(np.median(ests))


def estimate(config: TechniqueConfig, scores, base_joint: JointDistribution) -> float:
    """Dispatch one technique against a base joint distribution."""
    t = config.technique
    if t == "pcc":
        return estimate_pcc(scores)
    if t == "cpcc":
        return estimate_cpcc(scores, base_joint.curve)
    if t == "cc":
        return estimate_cc(scores, config.threshold)
    if t == "acc":
        return estimate_acc(scores, config.threshold, base_joint, config.denominator_guard)
    cc = to_class_conditionals(base_joint)
    target = histogram_of(scores, cc.edges)
    if t == "mixture":
        return estimate_mixture(target, cc, config.grid_step)
    return estimate_median_sweep(target, cc, config.denominator_guard)
