"""Prevalence estimators: Classify & Count / CDE-Iterate, Adjusted Classify &
Count, and the EM (maximum likelihood) estimator.

Each estimator runs against a :class:`TestEvaluator`, which answers exactly
two questions about the test distribution -- the rate of class-0 decisions of
a classifier and the expectation of a function of the features.  A
:class:`PopulationEvaluator` answers them analytically (CDF evaluations and
quadrature), a :class:`SampleEvaluator` empirically; estimators never look at
test labels through either backend.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Protocol, runtime_checkable

import numpy as np

from .classify import ThresholdClassifier, weighted_bayes_classifier
from .models import DensityRatio, PopulationModel, marginal_density
from .numerics import Bracket, find_root_bracketed, integrate_interval
from .sampling import LabeledDataset

_DEGENERATE_RATE_GAP = 1e-12


class DegenerateClassifier(ValueError):
    """The classifier's training rates coincide, so no adjustment is possible."""


class LabelsHidden(RuntimeError):
    """A label-dependent query was made on a label-blind evaluator."""


class Method(str, Enum):
    CC = "CC"
    CDE2 = "CDE2"
    CDE_INF = "CDEinf"
    ACC = "ACC"
    EM = "EM"


class EstimateStatus(str, Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    BOUNDARY_LOW = "boundary_low"
    BOUNDARY_HIGH = "boundary_high"
    RAW_OUT_OF_RANGE = "raw_out_of_range"


@dataclass(frozen=True)
class PrevalenceEstimate:
    """Estimator output.  ``value`` may fall outside [0, 1] for ACC; ``trace``
    holds the CDE iterate sequence when applicable."""

    value: float
    method: Method
    status: EstimateStatus
    trace: tuple[float, ...] | None = None


@runtime_checkable
class TestEvaluator(Protocol):
    def predict_positive_rate(self, clf: ThresholdClassifier) -> float: ...

    def expect(self, fn: Callable) -> float: ...


class PopulationEvaluator:
    """Exact evaluation against a test population model."""

    def __init__(self, model: PopulationModel):
        self.model = model

    @property
    def prevalence0(self) -> float:
        return self.model.prevalence0

    def predict_positive_rate(self, clf: ThresholdClassifier) -> float:
        r0, r1 = self.rates_by_class(clf)
        q = self.model.prevalence0
        return q * r0 + (1.0 - q) * r1

    def rates_by_class(self, clf: ThresholdClassifier) -> tuple[float, float]:
        """(Q[g=0 | Y=0], Q[g=0 | Y=1]) from the class-conditional CDFs."""
        return clf.rate_class0(self.model.cdf0), clf.rate_class0(self.model.cdf1)

    def expect(self, fn: Callable) -> float:
        lo, hi = self.model.support
        return integrate_interval(
            lambda x: fn(x) * marginal_density(self.model, x), lo, hi,
            abs_tol=1e-13, rel_tol=1e-11,
        )


class SampleEvaluator:
    """Empirical evaluation over the features of a test sample.

    The quantification surface (``predict_positive_rate``, ``expect``) reads
    features only.  Label-dependent queries (``rates_by_class``,
    ``prevalence0``, used by evaluation metrics) raise :class:`LabelsHidden`
    when the evaluator was built with ``labels_hidden=True``.
    """

    def __init__(self, dataset: LabeledDataset, labels_hidden: bool = False):
        self.dataset = dataset
        self.labels_hidden = labels_hidden
        self._features = np.asarray(dataset.features, dtype=float)

    def predict_positive_rate(self, clf: ThresholdClassifier) -> float:
        return float(np.mean(clf.predict(self._features) == 0))

    def expect(self, fn: Callable) -> float:
        return float(np.mean(fn(self._features)))

    def _labels(self) -> np.ndarray:
        if self.labels_hidden:
            raise LabelsHidden("evaluator was built with labels_hidden=True")
        return np.asarray(self.dataset.labels)

    @property
    def prevalence0(self) -> float:
        return float(np.mean(self._labels() == 0))

    def rates_by_class(self, clf: ThresholdClassifier) -> tuple[float, float]:
        labels = self._labels()
        predictions = clf.predict(self._features)
        rates = []
        for cls in (0, 1):
            mask = labels == cls
            rates.append(float(np.mean(predictions[mask] == 0)) if mask.any() else 0.0)
        return rates[0], rates[1]


def classify_and_count(evaluator: TestEvaluator, clf: ThresholdClassifier) -> PrevalenceEstimate:
    """Rate of class-0 decisions, taken directly as the prevalence estimate."""
    return PrevalenceEstimate(evaluator.predict_positive_rate(clf), Method.CC, EstimateStatus.CONVERGED)


def training_rates(train: PopulationModel, clf: ThresholdClassifier) -> tuple[float, float]:
    """(true positive rate, false positive rate) of ``clf`` on the training population."""
    return clf.rate_class0(train.cdf0), clf.rate_class0(train.cdf1)


def acc_estimate(
    evaluator: TestEvaluator, clf: ThresholdClassifier, tpr: float, fpr: float
) -> PrevalenceEstimate:
    """Adjusted Classify & Count: (Q[g=0] - fpr) / (tpr - fpr).

    The raw value is returned unclamped; estimates outside [0, 1] are flagged
    rather than truncated.

    Raises:
        DegenerateClassifier: if tpr and fpr are (numerically) equal.
    """
    if abs(tpr - fpr) < _DEGENERATE_RATE_GAP:
        raise DegenerateClassifier(
            f"tpr = {tpr} and fpr = {fpr} coincide; the decision carries no class information"
        )
    value = (evaluator.predict_positive_rate(clf) - fpr) / (tpr - fpr)
    status = EstimateStatus.CONVERGED if 0.0 <= value <= 1.0 else EstimateStatus.RAW_OUT_OF_RANGE
    return PrevalenceEstimate(value, Method.ACC, status)


def em_estimate(
    evaluator: TestEvaluator, ratio: DensityRatio, tol: float = 1e-10
) -> PrevalenceEstimate:
    """Maximum-likelihood prevalence under prior probability shift.

    The estimate is the unique root q in (0, 1) of

        E_Q[(R - 1) / (1 + q (R - 1))] = 0,

    which exists iff E_Q[R] > 1 and E_Q[1/R] > 1.  When a moment condition
    fails the estimate sits at the corresponding boundary (0 or 1) and the
    status says which.
    """
    moment_r = evaluator.expect(ratio)
    if moment_r <= 1.0:
        return PrevalenceEstimate(0.0, Method.EM, EstimateStatus.BOUNDARY_LOW)
    moment_inv = evaluator.expect(lambda x: 1.0 / ratio(x))
    if moment_inv <= 1.0:
        return PrevalenceEstimate(1.0, Method.EM, EstimateStatus.BOUNDARY_HIGH)

    def likelihood_value(q: float) -> float:
        return evaluator.expect(lambda x: (ratio(x) - 1.0) / (1.0 + q * (ratio(x) - 1.0)))

    value = find_root_bracketed(likelihood_value, Bracket(1e-12, 1.0 - 1e-12), tol=tol)
    return PrevalenceEstimate(value, Method.EM, EstimateStatus.CONVERGED)


def cde_iterate(
    train: PopulationModel,
    evaluator: TestEvaluator,
    max_iter: int = 1000,
    tol: float = 1e-8,
) -> PrevalenceEstimate:
    """Iterated cost-sensitive reclassification (CDE-Iterate).

    Starting from equal weights, each step takes the class-0 rate of the
    current weighted Bayes classifier as the next prevalence iterate and
    feeds it back as the weights (q_k, 1 - q_k).  The iterate sequence is
    monotone and converges; iteration stops once successive iterates differ
    by at most ``tol`` or ``max_iter`` iterates have been computed.  The full
    trace is returned: trace[0] is plain Classify & Count.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    a0, a1 = 1.0, 1.0
    trace: list[float] = []
    status = EstimateStatus.MAX_ITERATIONS
    for k in range(max_iter):
        clf = weighted_bayes_classifier(train, a0, a1)
        q_k = evaluator.predict_positive_rate(clf)
        trace.append(q_k)
        if k >= 1 and abs(trace[-1] - trace[-2]) <= tol:
            status = EstimateStatus.CONVERGED
            break
        a0, a1 = q_k, 1.0 - q_k
    return PrevalenceEstimate(trace[-1], Method.CDE_INF, status, tuple(trace))


def fixed_point_residual(train: PopulationModel, evaluator: TestEvaluator, q: float) -> float:
    """Q[R(X) > (1-q)/q] - q, the defect of q as a CDE-Iterate fixed point.

    Ties {R = (1-q)/q} have probability zero for the continuous models in
    scope, so the strict-inequality event is evaluated.
    """
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie strictly between 0 and 1")
    clf = weighted_bayes_classifier(train, q, 1.0 - q)
    return evaluator.predict_positive_rate(clf) - q
