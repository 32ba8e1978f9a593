import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def gen():
    """A plain numpy generator for oracle draws, independent of RngStream."""
    return np.random.default_rng(20240817)
