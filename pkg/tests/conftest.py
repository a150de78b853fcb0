import math

import pytest

from analogical_inference.core import PowerProfile
from analogical_inference.regression import LabeledDataset


@pytest.fixture
def squares_profile():
    return PowerProfile((2.0, 2.0), 2.0)


@pytest.fixture
def three_points():
    """Three points labeled by x -> sqrt(2 x1^2 + 3 x2^2 + 1)."""
    return LabeledDataset(
        [[1.0, 1.0], [2.0, 1.0], [1.0, 2.0]],
        [math.sqrt(6.0), math.sqrt(12.0), math.sqrt(15.0)],
    )
