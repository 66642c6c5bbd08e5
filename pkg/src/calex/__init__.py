"""Prevalence estimation by calibrating a classifier on a labeled sample and
extrapolating to unlabeled target datasets."""

from .core import (
    BinnedCurve,
    ClassConditionals,
    Histogram,
    IdentityCurve,
    IsotonicCurve,
    JointDistribution,
    PlattCurve,
    ScoredItem,
    StepCurve,
    TemperatureCurve,
    eval_curve,
    from_class_conditionals,
    hellinger,
    histogram_of,
    mix,
    prevalence_of,
    to_class_conditionals,
)

__version__ = "0.1.0"

__all__ = [
    "BinnedCurve", "ClassConditionals", "Histogram", "IdentityCurve", "IsotonicCurve",
    "JointDistribution", "PlattCurve", "ScoredItem", "StepCurve", "TemperatureCurve",
    "eval_curve", "from_class_conditionals", "hellinger", "histogram_of", "mix",
    "prevalence_of", "to_class_conditionals",
]
