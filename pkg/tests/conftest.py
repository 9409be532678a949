import math

import numpy as np
import pytest

from atlaspack import CameraFrame


@pytest.fixture
def cam90() -> CameraFrame:
    """fov 90 degrees, square aspect, identity view."""
    return CameraFrame.from_params(math.radians(90), 1.0, 0.1, 100.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
