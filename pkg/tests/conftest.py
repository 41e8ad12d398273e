import pytest

from stablekm.metric import Objective, build_instance


@pytest.fixture
def toy():
    """Points 0 and 10 on a line; candidate centres 0, 10 and 4; k = 1."""
    return build_instance([[0], [10]], [[0], [10], [4]], 1)


@pytest.fixture
def toy_median():
    return build_instance([[0], [10]], [[0], [10], [4]], 1, Objective.MEDIAN)
