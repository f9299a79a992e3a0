import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def four_cycle():
    """The 4-cycle metric window: d(0,2) = d(1,3) = 2, neighbors at 1."""
    from coarsec import GroundSet, MetricWindow

    d = np.array([[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]])
    return MetricWindow(GroundSet((0, 1, 2, 3)), d, {"kind": "fixture"})
