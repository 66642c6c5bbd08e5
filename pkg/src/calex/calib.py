"""Calibration phase: choose a calibration sample from a scored base dataset,
fit a calibration curve to its labels, and assemble the base joint
distribution."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence

import numpy as np

from .core import (
    BinnedCurve,
    CalibrationCurve,
    IsotonicCurve,
    JointDistribution,
    PlattCurve,
    ScoredItem,
    TemperatureCurve,
    bin_index,
    check_scores,
    histogram_of,
    labels_of,
    logit,
    scores_of,
    sigmoid,
    uniform_edges,
)


class DegenerateFitError(ValueError):
    """The calibration sample contains only one class."""


class AllocationError(ValueError):
    """A sample allocation cannot be satisfied."""


# --------------------------------------------------------------------------
# Sampling


def stratify(scores, k: int):
    """Equal-width strata over [0, 1]; returns (stratum index per score,
    count per stratum)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    s = check_scores(scores)
    idx = bin_index(s, uniform_edges(k))
    return idx, np.bincount(idx, minlength=k)


@dataclass(frozen=True)
class StratifiedSample:
    items: List[ScoredItem]
    strata: np.ndarray  # stratum index per sampled item
    strata_bounds: np.ndarray
    population_counts: np.ndarray

    @property
    def k(self) -> int:
        return len(self.strata_bounds) - 1

    @property
    def scores(self) -> np.ndarray:
        return scores_of(self.items)

    @property
    def labels(self) -> np.ndarray:
        return labels_of(self.items)

    @property
    def sample_counts(self) -> np.ndarray:
        return np.bincount(self.strata, minlength=self.k)

    @property
    def design_weights(self) -> np.ndarray:
        """Inverse inclusion rate N_h / n_h of each sampled item's stratum."""
        n = self.sample_counts
        rate = np.divide(self.population_counts, n, out=np.zeros(self.k), where=n > 0)
        return rate[self.strata]

    @property
    def stratum_of(self) -> Dict[str, int]:
        return {it.id: int(h) for it, h in zip(self.items, self.strata)}


def _draw(base, idx_by_stratum, alloc, k, rng):
    chosen = []
    for h in range(k):
        pool = idx_by_stratum[h]
        if alloc[h] > 0:
            chosen.append(rng.choice(pool, size=int(alloc[h]), replace=False))
    picked = np.sort(np.concatenate(chosen)) if chosen else np.array([], dtype=int)
    return picked


def _build_sample(base: Sequence[ScoredItem], picked, strata_all, counts, k) -> StratifiedSample:
    return StratifiedSample(
        items=[base[i] for i in picked],
        strata=strata_all[picked],
        strata_bounds=uniform_edges(k),
        population_counts=counts,
    )


def sample_from_allocation(base: Sequence[ScoredItem], alloc, k: int, seed: int) -> StratifiedSample:
    """Uniform draws without replacement, ``alloc[h]`` items from stratum h."""
    strata_all, counts = stratify(scores_of(base), k)
    alloc = np.asarray(alloc, dtype=int)
    if np.any(alloc > counts) or np.any(alloc < 0):
        raise AllocationError("allocation exceeds stratum sizes")
    idx_by_stratum = [np.flatnonzero(strata_all == h) for h in range(k)]
    picked = _draw(base, idx_by_stratum, alloc, k, np.random.default_rng(seed))
    return _build_sample(base, picked, strata_all, counts, k)


def sample_uniform_strata(base: Sequence[ScoredItem], cap: int = 200, k: int = 10,
                          seed: int = 0) -> StratifiedSample:
    """Up to ``cap`` items from every stratum (all of them if fewer)."""
    if not base:
        raise ValueError("empty base dataset")
    _, counts = stratify(scores_of(base), k)
    return sample_from_allocation(base, np.minimum(counts, cap), k, seed)


def largest_remainder(quotas, total: int) -> np.ndarray:
    """Round nonnegative real quotas to integers summing to ``total``;
    ties go to the lower index."""
    quotas = np.asarray(quotas, dtype=float)
    floor = np.floor(quotas).astype(int)
    short = total - floor.sum()
    if short > 0:
        order = np.argsort(-(quotas - floor), kind="stable")
        floor[order[:short]] += 1
    return floor


def neyman_allocation(counts, sigmas, total: int) -> np.ndarray:
    """n_h proportional to N_h * sigma_h, capped at N_h, excess spread over
    the uncapped strata in proportion to their weights."""
    counts = np.asarray(counts, dtype=int)
    weights = counts * np.asarray(sigmas, dtype=float)
    if total > counts.sum():
        raise AllocationError(f"requested {total} items from {counts.sum()}")
    if weights.sum() <= 0:
        weights = counts.astype(float)  # no variance signal: proportional
    alloc = np.zeros(len(counts), dtype=int)
    free = np.ones(len(counts), dtype=bool)
    remaining = total
    while remaining > 0:
        w = np.where(free, weights, 0.0)
        if w.sum() <= 0:
            # leftover goes to strata with room, proportional to room
            w = np.where(counts > alloc, (counts - alloc).astype(float), 0.0)
        quota = w / w.sum() * remaining
        room = counts - alloc
        over = free & (quota > room) & (w > 0)
        if over.any():
            alloc[over] = counts[over]
            free[over] = False
            remaining = total - alloc.sum()
            continue
        alloc += largest_remainder(quota, remaining)
        break
    return alloc


def sample_neyman(base: Sequence[ScoredItem], total: int, k: int = 10, seed: int = 0) -> StratifiedSample:
    """Neyman allocation with the mean raw score of each stratum standing in
    for its unknown positive rate."""
    if total > len(base):
        raise AllocationError(f"requested {total} items from {len(base)}")
    scores = scores_of(base)
    strata_all, counts = stratify(scores, k)
    if total < np.count_nonzero(counts):
        raise AllocationError(f"total {total} is smaller than the {np.count_nonzero(counts)} nonempty strata")
    sums = np.bincount(strata_all, weights=scores, minlength=k)
    p_hat = np.divide(sums, counts, out=np.zeros(k), where=counts > 0)
    sigmas = np.sqrt(p_hat * (1.0 - p_hat))
    return sample_from_allocation(base, neyman_allocation(counts, sigmas, total), k, seed)


def sample_random(base: Sequence[ScoredItem], n: int, seed: int = 0) -> StratifiedSample:
    if n > len(base):
        raise AllocationError(f"requested {n} items from {len(base)}")
    rng = np.random.default_rng(seed)
    picked = np.sort(rng.choice(len(base), size=n, replace=False))
    return StratifiedSample(
        items=[base[i] for i in picked],
        strata=np.zeros(n, dtype=int),
        strata_bounds=uniform_edges(1),
        population_counts=np.array([len(base)]),
    )


# --------------------------------------------------------------------------
# Curve fitting. Fitters take (scores, labels) arrays and optional per-item
# weights; pass StratifiedSample.design_weights to fit against the base
# score distribution rather than the sample's.


def _check_labeled(scores, labels, weights=None):
    s = check_scores(scores)
    y = np.asarray(labels, dtype=float)
    if s.size == 0 or s.shape != y.shape:
        raise ValueError("need a nonempty sample with one label per score")
    if np.any((y != 0) & (y != 1)):
        raise ValueError("labels must be 0/1")
    if weights is None:
        w = np.ones_like(s)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != s.shape or np.any(w < 0) or w.sum() <= 0:
            raise ValueError("weights must be nonnegative, one per score, not all zero")
    return s, y, w / w.mean()


def _require_both_classes(y):
    if y.min() == y.max():
        raise DegenerateFitError("calibration sample contains a single class")


def fit_binned(scores, labels, bins: int = 20, weights=None) -> BinnedCurve:
    """Positive fraction per bin; empty bins take the overall fraction."""
    s, y, w = _check_labeled(scores, labels, weights)
    edges = uniform_edges(bins)
    idx = bin_index(s, edges)
    n = np.bincount(idx, weights=w, minlength=bins)
    pos = np.bincount(idx, weights=w * y, minlength=bins)
    probs = np.full(bins, np.average(y, weights=w))
    probs[n > 0] = pos[n > 0] / n[n > 0]
    return BinnedCurve(edges, probs)


PLATT_RIDGE = 1e-6


def platt_objective(w: float, b: float, scores, labels, ridge: float = PLATT_RIDGE,
                    weights=None) -> float:
    """Weighted mean negative Bernoulli log-likelihood plus ridge * (w^2 + b^2)."""
    z = w * np.asarray(scores, dtype=float) + b
    y = np.asarray(labels, dtype=float)
    # log(1 + e^z) - y z, stable
    nll = np.logaddexp(0.0, z) - y * z
    return float(np.average(nll, weights=weights) + ridge * (w * w + b * b))


def platt_gradient(w: float, b: float, scores, labels, ridge: float = PLATT_RIDGE,
                   weights=None) -> np.ndarray:
    s = np.asarray(scores, dtype=float)
    r = sigmoid(w * s + b) - np.asarray(labels, dtype=float)
    return np.array([np.average(r * s, weights=weights) + 2 * ridge * w,
                     np.average(r, weights=weights) + 2 * ridge * b])


def platt_newton(s, y, weights=None, ridge=PLATT_RIDGE, tol=1e-8, max_iter=100):
    """Damped Newton from (0, 0). Returns (w, b, objective trace)."""
    wt = np.ones_like(s) if weights is None else weights
    w = b = 0.0
    f = platt_objective(w, b, s, y, ridge, wt)
    trace = [f]
    for _ in range(max_iter):
        g = platt_gradient(w, b, s, y, ridge, wt)
        if np.max(np.abs(g)) < tol:
            break
        p = sigmoid(w * s + b)
        v = wt * p * (1 - p)
        h = np.array([[v @ (s * s), v @ s], [v @ s, v.sum()]]) / wt.sum()
        h += 2 * ridge * np.eye(2)
        step = np.linalg.solve(h, g)
        t = 1.0
        while t > 1e-12:
            nw, nb = w - t * step[0], b - t * step[1]
            nf = platt_objective(nw, nb, s, y, ridge, wt)
            if nf <= f:
                break
            t *= 0.5
        else:
            break
        w, b, f = nw, nb, nf
        trace.append(f)
    return w, b, trace


def fit_platt(scores, labels, weights=None, ridge: float = PLATT_RIDGE) -> PlattCurve:
    """Logistic regression of labels on raw score by damped Newton."""
    s, y, wt = _check_labeled(scores, labels, weights)
    _require_both_classes(y)
    w, b, _ = platt_newton(s, y, wt, ridge)
    return PlattCurve(float(w), float(b))


def pav(y, weights=None) -> np.ndarray:
    """Pool-adjacent-violators: nondecreasing least-squares fit to ``y``."""
    y = np.asarray(y, dtype=float)
    wts = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    vals: List[float] = []
    ws: List[float] = []
    lens: List[int] = []
    for yi, wi in zip(y, wts):
        vals.append(yi)
        ws.append(wi)
        lens.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            v, w_, n = vals.pop(), ws.pop(), lens.pop()
            tot = ws[-1] + w_
            vals[-1] = (vals[-1] * ws[-1] + v * w_) / tot
            ws[-1] = tot
            lens[-1] += n
    return np.repeat(vals, lens)


def fit_isotonic(scores, labels, weights=None) -> IsotonicCurve:
    s, y, w = _check_labeled(scores, labels, weights)
    order = np.argsort(s, kind="stable")
    s, y, w = s[order], y[order], w[order]
    # tied scores must share one fitted value: pool them first
    uniq, start = np.unique(s, return_index=True)
    tot = np.add.reduceat(w, start)
    means = np.divide(np.add.reduceat(w * y, start), tot, out=np.zeros_like(tot), where=tot > 0)
    fitted = pav(means, tot)
    keep = np.concatenate([[True], np.diff(fitted) > 0])
    return IsotonicCurve(uniq[keep], np.clip(fitted[keep], 0.0, 1.0))


def _golden_section(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-6) -> float:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def fit_temperature(scores, labels, clip_epsilon: float = 1e-6, weights=None) -> TemperatureCurve:
    s, y, w = _check_labeled(scores, labels, weights)
    _require_both_classes(y)
    if not 0 < clip_epsilon < 0.5:
        raise ValueError("clip_epsilon must be in (0, 0.5)")
    z = logit(np.clip(s, clip_epsilon, 1.0 - clip_epsilon))

    def nll(log_t):
        u = z / math.exp(log_t)
        return float(np.average(np.logaddexp(0.0, u) - y * u, weights=w))

    return TemperatureCurve(math.exp(_golden_section(nll, -4.0, 4.0)), clip_epsilon)


FITTERS = ("binned", "platt", "isotonic", "temperature")


def fit_curve(name: str, scores, labels, bins: int = 20, weights=None) -> CalibrationCurve:
    if name == "binned":
        return fit_binned(scores, labels, bins, weights=weights)
    if name == "platt":
        return fit_platt(scores, labels, weights=weights)
    if name == "isotonic":
        return fit_isotonic(scores, labels, weights=weights)
    if name == "temperature":
        return fit_temperature(scores, labels, weights=weights)
    raise ValueError(f"unknown fitter {name!r}; choose from {FITTERS}")


def build_base_joint(base_scores, curve: CalibrationCurve, bins: int = 20) -> JointDistribution:
    return JointDistribution(histogram_of(base_scores, bins), curve)
