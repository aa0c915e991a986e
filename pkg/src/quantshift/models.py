"""Distribution models on the real line: the equal-variance binormal family,
generic density-pair populations, posteriors, marginals, and density ratios.

All densities and ratios are plain callables that accept either a float or a
numpy array.  Populations are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .numerics import RngStream

Density = Callable[[np.ndarray], np.ndarray]

_SQRT2 = math.sqrt(2.0)
_NORM_CONST = 1.0 / math.sqrt(2.0 * math.pi)

# Class-conditional support windows extend this many standard deviations past
# the means, plus the drift of any exp-tilted integrand (see support helpers).
TRUNCATION_HALFWIDTH = 12.0


class InvalidThreshold(ValueError):
    """Density-ratio thresholds must be strictly positive."""


def normal_pdf(x, mean: float, sd: float):
    z = (np.asarray(x, dtype=float) - mean) / sd
    return _NORM_CONST / sd * np.exp(-0.5 * z * z)


def normal_cdf(x: float, mean: float, sd: float) -> float:
    if math.isinf(x):
        return 0.0 if x < 0 else 1.0
    return 0.5 * (1.0 + math.erf((x - mean) / (sd * _SQRT2)))


@dataclass(frozen=True)
class BinormalParams:
    """Equal-variance two-normal model: class 0 ~ N(mu, sigma^2), class 1 ~ N(nu, sigma^2)."""

    mu: float = 0.0
    nu: float = 2.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not self.mu < self.nu:
            raise ValueError("mu must be smaller than nu")


@dataclass(frozen=True)
class DensityRatio:
    """Log-linear density ratio R(x) = exp(log_slope * x + log_offset).

    Every class-conditional ratio in this package has this form, which makes
    R strictly monotone and lets thresholds be inverted in closed form.
    """

    log_slope: float
    log_offset: float

    def __post_init__(self):
        if self.log_slope == 0:
            raise ValueError("log_slope must be nonzero (constant ratios are degenerate)")

    def __call__(self, x):
        return np.exp(self.log_slope * np.asarray(x, dtype=float) + self.log_offset)

    @property
    def decreasing(self) -> bool:
        return self.log_slope < 0

    def invert_threshold(self, c: float) -> float:
        """Cut point x_c of the level set {R = c}.

        For a decreasing ratio, {R > c} = {x < x_c}; for an increasing one,
        {R > c} = {x > x_c}.
        """
        if c <= 0:
            raise InvalidThreshold(f"ratio threshold must be positive, got {c}")
        return (math.log(c) - self.log_offset) / self.log_slope

    def sqrt(self) -> "DensityRatio":
        """The pointwise square root, again log-linear."""
        return DensityRatio(0.5 * self.log_slope, 0.5 * self.log_offset)


@dataclass(frozen=True)
class PopulationModel:
    """A pair of class-conditional feature densities plus a class-0 prevalence.

    ``cdf0``/``cdf1`` evaluate the class-conditional distribution functions
    (analytic for normal conditionals, quadrature-backed otherwise).
    ``support`` is the window outside which both densities are numerically
    negligible; population integrals run over it.  ``ratio`` is the analytic
    f0/f1 when known, and ``sampler0``/``sampler1`` draw single values from
    the class conditionals.
    """

    f0: Density
    f1: Density
    cdf0: Callable[[float], float]
    cdf1: Callable[[float], float]
    prevalence0: float
    support: tuple[float, float]
    ratio: DensityRatio | None = None
    sampler0: Callable[[RngStream], float] | None = field(default=None, repr=False)
    sampler1: Callable[[RngStream], float] | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 < self.prevalence0 < 1.0:
            raise ValueError("prevalence0 must lie strictly between 0 and 1")
        if not self.support[0] < self.support[1]:
            raise ValueError("support window must be non-empty")

    def with_prevalence(self, prevalence0: float) -> "PopulationModel":
        """Same conditionals, new class-0 prevalence (a prior probability shift)."""
        return replace(self, prevalence0=prevalence0)


def marginal_density(pop: PopulationModel, x):
    """Unconditional feature density p*f0 + (1-p)*f1."""
    p = pop.prevalence0
    return p * pop.f0(x) + (1.0 - p) * pop.f1(x)


def posterior(pop: PopulationModel, x):
    """Feature-conditional class-0 probability p*f0 / (p*f0 + (1-p)*f1)."""
    p = pop.prevalence0
    d0 = p * pop.f0(x)
    d1 = (1.0 - p) * pop.f1(x)
    return d0 / (d0 + d1)


def binormal_posterior(params: BinormalParams, prevalence0: float, x):
    """Class-0 posterior of the binormal model in closed logistic form.

    Equal variances make the posterior 1 / (1 + exp(a*x + b)) with
    a = (nu - mu) / sigma^2 and b = (mu^2 - nu^2) / (2 sigma^2) + log((1-p)/p).
    """
    if not 0.0 < prevalence0 < 1.0:
        raise ValueError("prevalence0 must lie strictly between 0 and 1")
    s2 = params.sigma**2
    a = (params.nu - params.mu) / s2
    b = (params.mu**2 - params.nu**2) / (2.0 * s2) + math.log((1.0 - prevalence0) / prevalence0)
    return 1.0 / (1.0 + np.exp(a * np.asarray(x, dtype=float) + b))


def binormal_density_ratio(params: BinormalParams) -> DensityRatio:
    """Ratio f0/f1 of the binormal conditionals: exp(x (mu-nu)/sigma^2 + (nu^2-mu^2)/(2 sigma^2))."""
    s2 = params.sigma**2
    return DensityRatio((params.mu - params.nu) / s2, (params.nu**2 - params.mu**2) / (2.0 * s2))


def binormal_population(params: BinormalParams, prevalence0: float) -> PopulationModel:
    """Population with normal class conditionals, analytic CDFs and exact samplers."""
    mu, nu, sigma = params.mu, params.nu, params.sigma
    ratio = binormal_density_ratio(params)
    # widen by the exp-tilt drift |log_slope| * sigma^2 so that ratio-weighted
    # integrands keep Gaussian-order tails inside the window
    pad = TRUNCATION_HALFWIDTH * sigma + abs(ratio.log_slope) * sigma**2
    return PopulationModel(
        f0=lambda x: normal_pdf(x, mu, sigma),
        f1=lambda x: normal_pdf(x, nu, sigma),
        cdf0=lambda x: normal_cdf(x, mu, sigma),
        cdf1=lambda x: normal_cdf(x, nu, sigma),
        prevalence0=prevalence0,
        support=(mu - pad, nu + pad),
        ratio=ratio,
        sampler0=lambda stream: mu + sigma * stream.next_gaussian(),
        sampler1=lambda stream: nu + sigma * stream.next_gaussian(),
    )


def conditionals_from_posterior(
    f: Density, post: Callable, prevalence0: float
) -> tuple[Density, Density]:
    """Recover class-conditional densities from a marginal density and a posterior.

    f0 = post * f / p and f1 = (1 - post) * f / (1 - p); the pair reproduces
    the posterior when recombined with prevalence ``prevalence0``.
    """
    if not 0.0 < prevalence0 < 1.0:
        raise ValueError("prevalence0 must lie strictly between 0 and 1")
    p = prevalence0

    def f0(x):
        return post(x) * f(x) / p

    def f1(x):
        return (1.0 - post(x)) * f(x) / (1.0 - p)

    return f0, f1


class GridCdf:
    """Quadrature-backed CDF of a density on a truncated support.

    The support is split into ``cells`` panels whose Gauss-Legendre integrals
    are cached at construction; a query integrates the partial cell containing
    x, so the accuracy is that of the quadrature rule, not of any
    interpolation.  Queries below/above the support return 0/1.
    """

    _NODES, _WEIGHTS = leggauss(15)

    def __init__(self, density: Density, support: tuple[float, float], cells: int = 2048):
        self._density = density
        self._lo, self._hi = support
        self._edges = np.linspace(self._lo, self._hi, cells + 1)
        mids = 0.5 * (self._edges[:-1] + self._edges[1:])
        halves = 0.5 * np.diff(self._edges)
        values = density(mids[:, None] + halves[:, None] * self._NODES[None, :])
        masses = halves * (values @ self._WEIGHTS)
        self._cum = np.concatenate([[0.0], np.cumsum(masses)])

    @property
    def total_mass(self) -> float:
        return float(self._cum[-1])

    def __call__(self, x: float) -> float:
        if x <= self._lo:
            return 0.0
        if x >= self._hi:
            return 1.0
        i = int(np.searchsorted(self._edges, x, side="right")) - 1
        a = float(self._edges[i])
        mid, half = 0.5 * (a + x), 0.5 * (x - a)
        partial = half * float(self._density(mid + half * self._NODES) @ self._WEIGHTS)
        return min(1.0, float(self._cum[i]) + partial)
