import pytest

import quantshift as qs

GRID = (0.01, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99)


@pytest.fixture(scope="session")
def train():
    """Default training population: binormal (0, 2, 1) at prevalence 0.5."""
    return qs.binormal_population(qs.BinormalParams(), 0.5)


@pytest.fixture(scope="session")
def invariant_test(train):
    """Test conditionals for the invariant-density-ratio scenario (any prevalence)."""
    scenario = qs.ShiftScenario(qs.ShiftKind.INVARIANT_RATIO, train, 0.5)
    return qs.make_test_population(scenario)


@pytest.fixture(scope="session")
def sqrt_test(train):
    """Test conditionals for the square-root-ratio scenario (any prevalence)."""
    scenario = qs.ShiftScenario(qs.ShiftKind.SQRT_RATIO, train, 0.5)
    return qs.make_test_population(scenario)
