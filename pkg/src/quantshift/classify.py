"""Cost-sensitive Bayes classifiers on one-dimensional features.

The optimal decision set for class-weighted costs (a0, a1) is
{a1 f1 < a0 f0}; because every density ratio in scope is strictly monotone,
that set is a half-line and classifiers reduce to a feature-space cut point.
Population probabilities of decisions are then exact CDF evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import PopulationModel


@dataclass(frozen=True)
class CostPair:
    """Misclassification costs: c0 for 'predict 1 when truth is 0', c1 for the converse."""

    c0: float = 1.0
    c1: float = 1.0

    def __post_init__(self):
        if self.c0 < 0 or self.c1 < 0:
            raise ValueError("costs must be nonnegative")
        if self.c0 + self.c1 <= 0:
            raise ValueError("at least one cost must be positive")


@dataclass(frozen=True)
class ThresholdClassifier:
    """Decision rule 'class 0 iff x on one side of cut'; ties go to class 1.

    ``posterior_threshold`` records the training-posterior level the rule
    realizes; 0 and 1 give the constant always-0 / always-1 classifiers
    (cut +inf / -inf with ``class0_below``).
    """

    cut: float
    posterior_threshold: float
    class0_below: bool = True

    def predict(self, x):
        """Label 0 or 1 for a scalar or array of features."""
        x = np.asarray(x, dtype=float)
        mask = x < self.cut if self.class0_below else x > self.cut
        labels = np.where(mask, 0, 1)
        return labels if labels.ndim else int(labels)

    def rate_class0(self, cdf) -> float:
        """Probability of deciding class 0 under the distribution with CDF ``cdf``."""
        if math.isinf(self.cut):
            decided0 = (self.cut > 0) == self.class0_below
            return 1.0 if decided0 else 0.0
        mass_below = cdf(self.cut)
        return mass_below if self.class0_below else 1.0 - mass_below


ALWAYS_CLASS_0 = ThresholdClassifier(cut=math.inf, posterior_threshold=0.0)
ALWAYS_CLASS_1 = ThresholdClassifier(cut=-math.inf, posterior_threshold=1.0)


def classify(clf: ThresholdClassifier, x):
    return clf.predict(x)


def weighted_bayes_classifier(train: PopulationModel, a0: float, a1: float) -> ThresholdClassifier:
    """Minimizer of a0 P0[g=1] + a1 P1[g=0] over all classifiers.

    The decision set is {a1 f1 < a0 f0}, i.e. {R > a1/a0} in terms of the
    density ratio; a0 = 0 or a1 = 0 yields the constant classifiers.
    """
    if a0 < 0 or a1 < 0 or a0 + a1 <= 0:
        raise ValueError("weights must be nonnegative with a positive sum")
    if a0 == 0:
        return ALWAYS_CLASS_1
    if a1 == 0:
        return ALWAYS_CLASS_0
    if train.ratio is None:
        raise ValueError("training model carries no invertible density ratio")
    cut = train.ratio.invert_threshold(a1 / a0)
    p = train.prevalence0
    u = a1 * p / (a1 * p + a0 * (1.0 - p))
    return ThresholdClassifier(cut=cut, posterior_threshold=u, class0_below=train.ratio.decreasing)


def bayes_classifier(train: PopulationModel, costs: CostPair = CostPair()) -> ThresholdClassifier:
    """Cost-sensitive Bayes classifier for the training distribution.

    Uses the prevalence-weighted form a0 = c0 * P[Y=0], a1 = c1 * P[Y=1]; with
    c0 = c1 this is the minimum-error rule (posterior threshold 1/2).
    """
    p = train.prevalence0
    return weighted_bayes_classifier(train, costs.c0 * p, costs.c1 * (1.0 - p))


def adapt_threshold(
    train: PopulationModel, estimated_test_prevalence0: float, costs: CostPair = CostPair()
) -> ThresholdClassifier:
    """Re-threshold the training posterior for an estimated test prevalence.

    Under prior probability shift the test-optimal rule compares the training
    posterior against

        w0 / (w0 + w1),  w0 = c0 (1-q)/(1-p),  w1 = c1 q/p,

    where q is the estimated test prevalence and p the training prevalence.
    Estimates at or beyond the boundaries give the constant classifiers, so
    out-of-range inputs are legal.
    """
    q = estimated_test_prevalence0
    if q <= 0.0:
        return ALWAYS_CLASS_1
    if q >= 1.0:
        return ALWAYS_CLASS_0
    p = train.prevalence0
    w0 = costs.c0 * (1.0 - q) / (1.0 - p)
    w1 = costs.c1 * q / p
    u = w0 / (w0 + w1)
    if u >= 1.0:  # c1 = 0: nothing penalizes predicting class 0
        return ALWAYS_CLASS_0
    if u <= 0.0:  # c0 = 0
        return ALWAYS_CLASS_1
    if train.ratio is None:
        raise ValueError("training model carries no invertible density ratio")
    # posterior > u  <=>  R > u (1-p) / ((1-u) p)
    c = u * (1.0 - p) / ((1.0 - u) * p)
    cut = train.ratio.invert_threshold(c)
    return ThresholdClassifier(cut=cut, posterior_threshold=u, class0_below=train.ratio.decreasing)


def cost_weighted_error(train: PopulationModel, clf: ThresholdClassifier, costs: CostPair) -> float:
    """Expected cost c0 P[g=1, Y=0] + c1 P[g=0, Y=1] on the training population."""
    p = train.prevalence0
    rate0 = clf.rate_class0(train.cdf0)
    rate1 = clf.rate_class0(train.cdf1)
    return costs.c0 * p * (1.0 - rate0) + costs.c1 * (1.0 - p) * rate1
