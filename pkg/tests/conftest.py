import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ncspin.liealg import build_generators, structure_constants  # noqa: E402


@pytest.fixture(scope="session")
def basis():
    return build_generators()


@pytest.fixture(scope="session")
def sc(basis):
    return structure_constants(basis)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
