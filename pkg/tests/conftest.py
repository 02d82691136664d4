import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from stratinstab.profiles import build_friedlander, tanh_shear  # noqa: E402


@pytest.fixture(scope="session")
def eq97():
    return build_friedlander(tanh_shear(5.0), 0.97)


@pytest.fixture(scope="session")
def eq_homog5():
    return build_friedlander(tanh_shear(5.0), 1.0)
