import math

import numpy as np
import pytest

import quantshift as qs
from quantshift.classify import ALWAYS_CLASS_0, ALWAYS_CLASS_1
from quantshift.quantify import EstimateStatus, LabelsHidden, Method

from conftest import GRID

PHI_1 = 0.5 * (1.0 + math.erf(1.0 / math.sqrt(2.0)))  # standard normal CDF at 1


def pop_eval(model, q):
    return qs.PopulationEvaluator(model.with_prevalence(q))


def fixed_sample_evaluator(features, labels=None):
    features = np.asarray(features, dtype=float)
    labels = np.zeros(len(features), dtype=int) if labels is None else np.asarray(labels)
    return qs.SampleEvaluator(qs.LabeledDataset(features, labels, (0, 0)))


class TestClassifyAndCount:
    def test_prior_shift_small_prevalence(self, train):
        clf = qs.bayes_classifier(train)
        est = qs.classify_and_count(pop_eval(train, 0.01), clf)
        assert est.value == pytest.approx(0.1655, abs=5e-5)
        assert est.method is Method.CC and est.status is EstimateStatus.CONVERGED

    def test_symmetric_point(self, train):
        clf = qs.bayes_classifier(train)
        est = qs.classify_and_count(pop_eval(train, 0.5), clf)
        assert est.value == pytest.approx(0.5, abs=1e-12)

    def test_invariant_ratio_small_prevalence(self, train, invariant_test):
        clf = qs.bayes_classifier(train)
        est = qs.classify_and_count(pop_eval(invariant_test, 0.01), clf)
        assert est.value == pytest.approx(0.1641, abs=5e-5)


class TestTrainingRates:
    def test_min_error_rates(self, train):
        clf = qs.bayes_classifier(train)
        tpr, fpr = qs.training_rates(train, clf)
        assert tpr == pytest.approx(PHI_1, abs=1e-14)
        assert fpr == pytest.approx(1.0 - PHI_1, abs=1e-14)

    def test_constant_classifiers(self, train):
        assert qs.training_rates(train, ALWAYS_CLASS_0) == (1.0, 1.0)
        assert qs.training_rates(train, ALWAYS_CLASS_1) == (0.0, 0.0)


class TestAccEstimate:
    def test_fisher_consistent_under_prior_shift(self, train):
        clf = qs.bayes_classifier(train)
        tpr, fpr = qs.training_rates(train, clf)
        for q in GRID:
            est = qs.acc_estimate(pop_eval(train, q), clf, tpr, fpr)
            assert est.value == pytest.approx(q, abs=1e-9)
            assert est.status is EstimateStatus.CONVERGED

    def test_consistency_holds_for_any_threshold(self, train):
        # the adjustment is classifier-independent under prior probability shift
        for cut in (-1.0, 0.2, 1.0, 1.7, 3.0):
            clf = qs.ThresholdClassifier(cut=cut, posterior_threshold=0.5)
            tpr, fpr = qs.training_rates(train, clf)
            for q in GRID:
                est = qs.acc_estimate(pop_eval(train, q), clf, tpr, fpr)
                assert est.value == pytest.approx(q, abs=1e-9)

    def test_invariant_ratio_witness(self, train, invariant_test):
        clf = qs.bayes_classifier(train)
        tpr, fpr = qs.training_rates(train, clf)
        est = qs.acc_estimate(pop_eval(invariant_test, 0.5), clf, tpr, fpr)
        assert est.value == pytest.approx(0.4859, abs=5e-4)
        assert abs(est.value - 0.5) > 0.005  # genuine inconsistency, not noise

    def test_negative_raw_value_is_preserved(self, train):
        clf = qs.bayes_classifier(train)
        tpr, fpr = qs.training_rates(train, clf)
        evaluator = fixed_sample_evaluator([10.0, 11.0, 12.0])  # all far on the class-1 side
        est = qs.acc_estimate(evaluator, clf, tpr, fpr)
        assert est.value < 0.0
        assert est.status is EstimateStatus.RAW_OUT_OF_RANGE

    def test_degenerate_classifier_raises(self, train):
        with pytest.raises(qs.DegenerateClassifier):
            qs.acc_estimate(pop_eval(train, 0.5), ALWAYS_CLASS_0, 1.0, 1.0)


class TestEmEstimate:
    def test_fisher_consistent_under_prior_shift(self, train):
        for q in GRID:
            est = qs.em_estimate(pop_eval(train, q), train.ratio)
            assert est.value == pytest.approx(q, abs=1e-8)
            assert est.status is EstimateStatus.CONVERGED

    def test_fisher_consistent_under_invariant_ratio(self, train, invariant_test):
        for q in GRID:
            est = qs.em_estimate(pop_eval(invariant_test, q), train.ratio)
            assert est.value == pytest.approx(q, abs=1e-6)

    def test_sqrt_ratio_witness(self, train, sqrt_test):
        est = qs.em_estimate(pop_eval(sqrt_test, 0.01), train.ratio)
        assert est.value == pytest.approx(0.1307, abs=5e-4)
        est = qs.em_estimate(pop_eval(sqrt_test, 0.3), train.ratio)
        assert est.value == pytest.approx(0.3500, abs=5e-4)
        assert abs(est.value - 0.3) > 0.005

    def test_boundary_low(self, train):
        evaluator = fixed_sample_evaluator([8.0, 9.0, 10.0])  # E[R] << 1
        est = qs.em_estimate(evaluator, train.ratio)
        assert est.value == 0.0 and est.status is EstimateStatus.BOUNDARY_LOW

    def test_boundary_high(self, train):
        evaluator = fixed_sample_evaluator([-8.0, -9.0, -10.0])  # E[1/R] << 1
        est = qs.em_estimate(evaluator, train.ratio)
        assert est.value == 1.0 and est.status is EstimateStatus.BOUNDARY_HIGH


class TestCdeIterate:
    def test_trace_prefix_and_limit(self, train):
        est = qs.cde_iterate(train, pop_eval(train, 0.01))
        assert est.trace[0] == pytest.approx(0.1655, abs=5e-5)
        assert est.trace[1] == pytest.approx(0.0406, abs=5e-5)
        assert est.value == pytest.approx(0.0, abs=1e-4)
        assert est.status is EstimateStatus.CONVERGED

    def test_symmetric_fixed_point(self, train):
        est = qs.cde_iterate(train, pop_eval(train, 0.5))
        assert all(abs(q - 0.5) < 1e-12 for q in est.trace)

    def test_sqrt_ratio_limit(self, train, sqrt_test):
        est = qs.cde_iterate(train, pop_eval(sqrt_test, 0.5))
        assert est.value == pytest.approx(0.4859, abs=5e-4)

    def test_monotone_after_first_step(self, train, invariant_test, sqrt_test):
        for model in (train, invariant_test, sqrt_test):
            for q in GRID:
                trace = qs.cde_iterate(train, pop_eval(model, q)).trace
                diffs = np.diff(trace[1:])
                assert np.all(diffs >= 0.0) or np.all(diffs <= 0.0)

    def test_interior_limit_not_the_true_prevalence(self, train):
        est = qs.cde_iterate(train, pop_eval(train, 0.3))
        assert est.value == pytest.approx(0.2389, abs=5e-4)
        assert abs(est.value - 0.3) > 0.005

    def test_max_iter_status(self, train):
        est = qs.cde_iterate(train, pop_eval(train, 0.01), max_iter=2, tol=1e-12)
        assert len(est.trace) == 2
        assert est.status is EstimateStatus.MAX_ITERATIONS

    def test_argument_validation(self, train):
        with pytest.raises(ValueError):
            qs.cde_iterate(train, pop_eval(train, 0.5), max_iter=0)
        with pytest.raises(ValueError):
            qs.cde_iterate(train, pop_eval(train, 0.5), tol=0.0)


class TestFixedPointResidual:
    def test_symmetric_zero(self, train):
        assert qs.fixed_point_residual(train, pop_eval(train, 0.5), 0.5) == pytest.approx(0.0, abs=1e-14)

    def test_converged_limit_is_a_root(self, train):
        evaluator = pop_eval(train, 0.3)
        assert abs(qs.fixed_point_residual(train, evaluator, 0.2389)) < 1e-3
        limit = qs.cde_iterate(train, evaluator).value
        assert abs(qs.fixed_point_residual(train, evaluator, limit)) < 1e-6

    def test_sign_change_brackets_interior_limits(self, train, invariant_test, sqrt_test):
        # scan a q-grid; every interior limit must sit inside a sign-change cell
        qgrid = np.linspace(0.005, 0.995, 100)
        for model in (train, invariant_test, sqrt_test):
            for q in (0.3, 0.5, 0.7):
                evaluator = pop_eval(model, q)
                limit = qs.cde_iterate(train, evaluator).value
                if not 0.01 < limit < 0.99:
                    continue
                residuals = np.array([qs.fixed_point_residual(train, evaluator, float(v)) for v in qgrid])
                signs = np.sign(residuals)
                changes = np.nonzero(signs[:-1] * signs[1:] <= 0)[0]
                assert any(qgrid[i] - 1e-12 <= limit <= qgrid[i + 1] + 1e-12 for i in changes)

    def test_domain_validation(self, train):
        with pytest.raises(ValueError):
            qs.fixed_point_residual(train, pop_eval(train, 0.5), 0.0)


class TestSampleEvaluator:
    def test_quantifiers_never_read_labels(self, train):
        stream = qs.RngStream(5, 1)
        dataset = qs.stratified_sample(train.with_prevalence(0.3), 2000, stream)
        blind = qs.SampleEvaluator(dataset, labels_hidden=True)
        clf = qs.bayes_classifier(train)
        tpr, fpr = qs.training_rates(train, clf)
        qs.classify_and_count(blind, clf)
        qs.acc_estimate(blind, clf, tpr, fpr)
        qs.em_estimate(blind, train.ratio)
        qs.cde_iterate(train, blind)
        with pytest.raises(LabelsHidden):
            blind.rates_by_class(clf)
        with pytest.raises(LabelsHidden):
            _ = blind.prevalence0

    def test_positive_rate_counts_predictions(self, train):
        clf = qs.bayes_classifier(train)  # cut at 1
        evaluator = fixed_sample_evaluator([0.0, 0.5, 2.0, 3.0])
        assert evaluator.predict_positive_rate(clf) == 0.5

    def test_expect_is_a_plain_mean(self):
        evaluator = fixed_sample_evaluator([1.0, 2.0, 3.0])
        assert evaluator.expect(lambda x: x * x) == pytest.approx(14.0 / 3.0, rel=1e-15)
