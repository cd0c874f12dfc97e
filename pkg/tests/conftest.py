import math

import numpy as np
import pytest

from echoslam import Wall, room_from_walls


@pytest.fixture
def unit_square():
    """Unit square centered at the origin: walls at 0, 90, 180, 270 degrees."""
    return room_from_walls(
        [Wall(0.0, 0.5), Wall(math.pi / 2, 0.5), Wall(math.pi, 0.5), Wall(3 * math.pi / 2, 0.5)]
    )


@pytest.fixture
def square_triple():
    """Measurement points O1=(0,0), O2=(0.2,0), O3=(0.2,0.1): d12=0.2, d23=0.1, phi=pi/2."""
    return np.array([[0.0, 0.0], [0.2, 0.0], [0.2, 0.1]])
