"""Construction of test-set populations related to a training population by
prior probability shift, invariant-density-ratio shift, or the square-root
ratio variant.

The two derived kinds start from a normal envelope density h* and decompose it
into a mixture q* h0 + (1-q*) h1 whose conditional ratio h0/h1 equals a target
ratio; the mixture weight q* is the root of the associated likelihood
equation.  One (h0, h1) pair then serves every test prevalence.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .models import (
    Density,
    DensityRatio,
    GridCdf,
    PopulationModel,
    TRUNCATION_HALFWIDTH,
    normal_pdf,
    posterior,
)
from .numerics import Bracket, find_root_bracketed, integrate_interval
from .sampling import rejection_sampler

# Existence of an interior mixture weight requires both ratio moments to
# exceed 1; borderline cases error out rather than silently clamp.
_MOMENT_MARGIN = 1e-9


class ShiftKind(str, Enum):
    PRIOR_SHIFT = "prior_shift"
    INVARIANT_RATIO = "invariant_ratio"
    SQRT_RATIO = "sqrt_ratio"


class NoInteriorSolution(ArithmeticError):
    """The mixture decomposition has no weight strictly inside (0, 1)."""

    def __init__(self, message: str, failed_moment: str):
        super().__init__(message)
        self.failed_moment = failed_moment


@dataclass(frozen=True)
class ShiftScenario:
    """A training population plus the recipe for its shifted test population.

    ``envelope_mean``/``envelope_sd`` parametrise the normal envelope h* used
    by the derived kinds; they are ignored under plain prior probability
    shift.
    """

    kind: ShiftKind
    train: PopulationModel
    test_prevalence0: float
    envelope_mean: float = 0.5
    envelope_sd: float = 1.4

    def __post_init__(self):
        if not 0.0 < self.test_prevalence0 < 1.0:
            raise ValueError("test_prevalence0 must lie strictly between 0 and 1")
        if self.envelope_sd <= 0:
            raise ValueError("envelope_sd must be positive")


def decompose_mixture(
    h_star: Density,
    ratio: DensityRatio,
    support: tuple[float, float],
) -> tuple[float, Density, Density]:
    """Split ``h_star`` into q* h0 + (1-q*) h1 with h0/h1 equal to ``ratio``.

    The weight q* is the unique root in (0, 1) of

        integral of (R - 1) / (1 + q (R - 1)) h* dx = 0,

    which exists iff both E[R] > 1 and E[1/R] > 1 under h*.  The component
    densities are h0 = R h* / (1 + q*(R - 1)) and h1 = h* / (1 + q*(R - 1)).

    Raises:
        NoInteriorSolution: naming the moment inequality that failed.
    """
    lo, hi = support

    def expect(fn) -> float:
        return integrate_interval(lambda x: fn(x) * h_star(x), lo, hi, abs_tol=1e-13, rel_tol=1e-11)

    moment_r = expect(ratio)
    if moment_r <= 1.0 + _MOMENT_MARGIN:
        raise NoInteriorSolution(
            f"E[R] = {moment_r} under the envelope does not exceed 1; "
            "the mixture has no class-0 component",
            failed_moment="E[R]",
        )
    moment_inv = expect(lambda x: 1.0 / ratio(x))
    if moment_inv <= 1.0 + _MOMENT_MARGIN:
        raise NoInteriorSolution(
            f"E[1/R] = {moment_inv} under the envelope does not exceed 1; "
            "the mixture has no class-1 component",
            failed_moment="E[1/R]",
        )

    def likelihood_value(q: float) -> float:
        return expect(lambda x: (ratio(x) - 1.0) / (1.0 + q * (ratio(x) - 1.0)))

    # strictly decreasing in q, so bisection on the near-full interval is safe
    q_star = find_root_bracketed(likelihood_value, Bracket(1e-10, 1.0 - 1e-10), tol=1e-12)

    def h0(x):
        r = ratio(x)
        return r * h_star(x) / (1.0 + q_star * (r - 1.0))

    def h1(x):
        r = ratio(x)
        return h_star(x) / (1.0 + q_star * (r - 1.0))

    return q_star, h0, h1


def _target_ratio(scenario: ShiftScenario) -> DensityRatio:
    if scenario.train.ratio is None:
        raise ValueError("training model carries no analytic density ratio")
    if scenario.kind is ShiftKind.SQRT_RATIO:
        return scenario.train.ratio.sqrt()
    return scenario.train.ratio


def envelope_support(scenario: ShiftScenario) -> tuple[float, float]:
    """Truncation window for the envelope density and everything derived from it."""
    ratio = _target_ratio(scenario)
    # ratio-weighted integrands are exp-tilted normals whose centre drifts by
    # |log_slope| * sd^2; widen the window accordingly
    pad = TRUNCATION_HALFWIDTH * scenario.envelope_sd + abs(ratio.log_slope) * scenario.envelope_sd**2
    return (scenario.envelope_mean - pad, scenario.envelope_mean + pad)


def make_test_population(scenario: ShiftScenario, cdf_cells: int = 2048) -> PopulationModel:
    """Build the test population described by ``scenario``.

    Under prior probability shift the training conditionals are reused with
    the new prevalence.  For the derived kinds, the conditional pair comes
    from the envelope decomposition and is the same for every test prevalence;
    their CDFs are quadrature-backed and their samplers accept-reject with the
    exact envelope constants 1/q* (class 0) and 1/(1-q*) (class 1).
    """
    if scenario.kind is ShiftKind.PRIOR_SHIFT:
        return scenario.train.with_prevalence(scenario.test_prevalence0)

    ratio = _target_ratio(scenario)
    mean, sd = scenario.envelope_mean, scenario.envelope_sd

    def h_star(x):
        return normal_pdf(x, mean, sd)

    support = envelope_support(scenario)
    q_star, h0, h1 = decompose_mixture(h_star, ratio, support)

    def sample_h_star(stream) -> float:
        return mean + sd * stream.next_gaussian()

    return PopulationModel(
        f0=h0,
        f1=h1,
        cdf0=GridCdf(h0, support, cells=cdf_cells),
        cdf1=GridCdf(h1, support, cells=cdf_cells),
        prevalence0=scenario.test_prevalence0,
        support=support,
        ratio=ratio,
        sampler0=rejection_sampler(h0, sample_h_star, h_star, 1.0 / q_star),
        sampler1=rejection_sampler(h1, sample_h_star, h_star, 1.0 / (1.0 - q_star)),
    )


def covariate_shift_identity_check(
    train: PopulationModel, test: PopulationModel, grid_points: int = 1000
) -> float:
    """Largest grid discrepancy between training and test posteriors.

    Covariate shift means the two feature-conditional class probabilities
    coincide; the returned supremum is ~0 exactly in that case.  The grid
    spans the overlap of the two support windows.
    """
    lo = max(train.support[0], test.support[0])
    hi = min(train.support[1], test.support[1])
    if not lo < hi:
        raise ValueError("support windows do not overlap")
    grid = np.linspace(lo, hi, grid_points)
    gap = np.abs(posterior(train, grid) - posterior(test, grid))
    return float(np.max(gap[np.isfinite(gap)]))
