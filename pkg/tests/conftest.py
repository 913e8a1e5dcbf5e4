import sys
from pathlib import Path

import numpy as np
import pytest

from avgcompact import MetricMeasureSpace, grid_space

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def s3():
    """Points 0, 1, 2 on a line with unit weights."""
    return MetricMeasureSpace(coords=[[0.0], [1.0], [2.0]])


@pytest.fixture
def grid101():
    return grid_space(100)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
