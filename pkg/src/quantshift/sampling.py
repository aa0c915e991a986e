"""Stratified dataset generation from population models.

Normal class conditionals are sampled exactly; derived (non-normal)
conditionals are sampled by accept-reject from their mixture envelope.
Every sampling call owns its random stream, so datasets are reproducible
byte-for-byte from (seed, stream_id).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .models import Density, PopulationModel
from .numerics import RngStream

_ENVELOPE_SLACK = 1.0 + 1e-9  # tolerated float rounding in the envelope test


class EnvelopeViolation(RuntimeError):
    """A proposal had target density above M * candidate density."""


@dataclass(frozen=True)
class LabeledDataset:
    """Features with binary labels and the stream identity that produced them."""

    features: np.ndarray
    labels: np.ndarray
    seed_record: tuple[int, int]

    def __post_init__(self):
        if len(self.features) != len(self.labels):
            raise ValueError("features and labels must have equal length")

    def __len__(self) -> int:
        return len(self.features)

    @property
    def prevalence0(self) -> float:
        return float(np.mean(self.labels == 0))


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def stratified_sample(pop: PopulationModel, n: int, stream: RngStream) -> LabeledDataset:
    """Draw n instances with exactly round(n * prevalence0) class-0 labels.

    Class-0 features are drawn first, then class-1, from the same stream, so
    the dataset is a pure function of (pop, n, stream identity).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if pop.sampler0 is None or pop.sampler1 is None:
        raise ValueError("population model carries no class-conditional samplers")
    n0 = _round_half_up(n * pop.prevalence0)
    features = np.empty(n)
    for i in range(n0):
        features[i] = pop.sampler0(stream)
    for i in range(n0, n):
        features[i] = pop.sampler1(stream)
    labels = np.concatenate([np.zeros(n0, dtype=int), np.ones(n - n0, dtype=int)])
    return LabeledDataset(features, labels, (stream.seed, stream.stream_id))


def rejection_draw(
    target: Density,
    candidate_sampler: Callable[[RngStream], float],
    candidate_density: Density,
    envelope_constant: float,
    stream: RngStream,
) -> float:
    """One accept-reject draw from ``target`` using candidate proposals.

    Requires target(x) <= envelope_constant * candidate_density(x) everywhere.
    """
    while True:
        x = candidate_sampler(stream)
        bound = envelope_constant * float(candidate_density(x))
        t = float(target(x))
        if t > bound * _ENVELOPE_SLACK:
            raise EnvelopeViolation(
                f"target({x}) = {t} exceeds envelope {bound}; constant M = {envelope_constant} is too small"
            )
        if stream.next_uniform() * bound <= t:
            return x


def rejection_sampler(
    target: Density,
    candidate_sampler: Callable[[RngStream], float],
    candidate_density: Density,
    envelope_constant: float,
) -> Callable[[RngStream], float]:
    """Bind a single-draw accept-reject sampler for ``target``."""

    def sample(stream: RngStream) -> float:
        return rejection_draw(target, candidate_sampler, candidate_density, envelope_constant, stream)

    return sample


def accept_reject_sample(
    target: Density,
    candidate_sampler: Callable[[RngStream], float],
    candidate_density: Density,
    M: float,
    count: int,
    stream: RngStream,
) -> np.ndarray:
    """Draw ``count`` values from ``target`` by accept-reject.

    The expected acceptance rate is 1/M when M is the tight envelope constant.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    out = np.empty(count)
    for i in range(count):
        out[i] = rejection_draw(target, candidate_sampler, candidate_density, M, stream)
    return out


def dataset_to_csv(dataset: LabeledDataset) -> str:
    """Render a dataset as CSV with round-trip decimal formatting."""
    lines = ["feature,label"]
    for x, y in zip(dataset.features, dataset.labels):
        lines.append(f"{float(x)!r},{int(y)}")
    return "\n".join(lines) + "\n"


def dataset_from_csv(text: str, seed_record: tuple[int, int] = (0, 0)) -> LabeledDataset:
    """Parse a dataset written by :func:`dataset_to_csv`."""
    rows = [line for line in text.strip().splitlines()[1:] if line]
    features = np.array([float(r.split(",")[0]) for r in rows])
    labels = np.array([int(r.split(",")[1]) for r in rows], dtype=int)
    return LabeledDataset(features, labels, seed_record)
