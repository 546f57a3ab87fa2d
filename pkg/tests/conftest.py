import math

import pytest

from nlsbif import Target, double_barrier, scan_axis, square_well

PI2_4 = math.pi ** 2 / 4


@pytest.fixture(scope="session")
def well2():
    return square_well(2.0)


@pytest.fixture(scope="session")
def threshold_well():
    return square_well(PI2_4)


@pytest.fixture(scope="session")
def barrier():
    """Double-barrier tent potential with two anti-bound states and no bound state."""
    return double_barrier(0.5)


@pytest.fixture(scope="session")
def bound_point(well2):
    (pt,) = scan_axis(well2, Target.W, 0.05, 1.4, 50)
    return pt


@pytest.fixture(scope="session")
def anti_bound_points(barrier):
    return scan_axis(barrier, Target.W, -3.0, -0.01, 100)
