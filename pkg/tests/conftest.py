import numpy as np
import pytest

from icrt_lab.paths import validate_theta


@pytest.fixture(scope="session")
def reference_theta():
    return validate_theta(0.862, (0.345, 0.302, 0.216))


@pytest.fixture(scope="session")
def brownian_theta():
    return validate_theta(1.0, ())


def make_tent():
    from icrt_lab.paths import continuous_path

    return continuous_path([0.0, 0.5, 1.0], [0.0, 0.5, 0.0])


def make_single_jump():
    """Rise to 0.2 at s=0.2, jump +0.3, linear decay to 0 at s=1."""
    from icrt_lab.paths import CadlagPath

    return CadlagPath(np.array([0.0, 0.2, 1.0]),
                      np.array([0.0, 0.2, 0.0]),
                      np.array([0.0, 0.5, 0.0]))
