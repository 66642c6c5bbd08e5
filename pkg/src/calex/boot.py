"""Percentile bootstrap over the whole calibrate-then-estimate pipeline."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .calib import DegenerateFitError, StratifiedSample, build_base_joint, fit_curve
from .core import DegenerateClassError, check_scores
from .estim import TechniqueConfig, UnstableThresholdError, estimate

MAX_RETRIES = 10
MAX_FAILURE_RATE = 0.05


class BootstrapUnstableError(RuntimeError):
    pass


@dataclass(frozen=True)
class EstimateReport:
    technique: str
    point: float
    ci_low: float
    ci_high: float
    replicates: int
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def width(self) -> float:
        return self.ci_high - self.ci_low


def resample_within_strata(strata: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Indices drawn with replacement inside each stratum; per-stratum counts
    are preserved."""
    out = np.empty(len(strata), dtype=int)
    pos = 0
    for h in np.unique(strata):
        members = np.flatnonzero(strata == h)
        out[pos:pos + len(members)] = rng.choice(members, size=len(members), replace=True)
        pos += len(members)
    return out


def one_replicate(base_scores, sample_scores, sample_labels, strata, weights, target_scores,
                  config: TechniqueConfig, fitter: str, seed: int) -> float:
    idx = resample_within_strata(strata, np.random.default_rng(seed))
    w = None if weights is None else weights[idx]
    curve = fit_curve(fitter, sample_scores[idx], sample_labels[idx], config.bins, weights=w)
    joint = build_base_joint(base_scores, curve, config.bins)
    scores = base_scores if target_scores is None else target_scores
    return estimate(config, scores, joint)


def bootstrap_estimate(base_scores, sample: StratifiedSample, target_scores=None,
                       config: Optional[TechniqueConfig] = None, fitter: str = "platt",
                       reps: int = 1000, seed: int = 0, weighted: bool = True,
                       seed_step: int = 1) -> EstimateReport:
    """Replicate r uses seed + r * seed_step; a degenerate replicate retries
    with its seed offset by reps * 10 per attempt. ``weighted`` fits each
    curve with the sample's design weights."""
    if reps < 2:
        raise ValueError("reps must be >= 2")
    config = config or TechniqueConfig()
    base_scores = check_scores(base_scores)
    target = None if target_scores is None else check_scores(target_scores)
    s, y, strata = sample.scores, sample.labels, np.asarray(sample.strata)
    weights = sample.design_weights if weighted else None

    estimates = []
    failures = 0
    for r in range(reps):
        for attempt in range(MAX_RETRIES + 1):
            rseed = seed + r * seed_step + attempt * reps * 10
            try:
                estimates.append(one_replicate(base_scores, s, y, strata, weights, target, config, fitter, rseed))
                break
            except (DegenerateFitError, DegenerateClassError, UnstableThresholdError):
                continue
        else:
            failures += 1
    if failures > MAX_FAILURE_RATE * reps:
        raise BootstrapUnstableError(f"{failures} of {reps} replicates failed")
    return summarize(estimates, config.technique, seed)


def summarize(estimates, technique: str, seed: int) -> EstimateReport:
    est = np.sort(np.asarray(estimates, dtype=float))
    lo, hi = np.percentile(est, [2.5, 97.5])
    return EstimateReport(technique, float(np.mean(est)), float(lo), float(hi), len(est), seed)
