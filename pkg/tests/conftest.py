import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def seeded_panel(seed, t_len, n):
    return np.random.default_rng(seed).standard_normal((t_len, n))
