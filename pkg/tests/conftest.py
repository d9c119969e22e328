from __future__ import annotations

import numpy as np
import pytest

from syncsim.config import parse_config
from syncsim.sim import run


@pytest.fixture(scope="session")
def reference_config():
    return parse_config()


@pytest.fixture(scope="session")
def reference_result(reference_config):
    """The 50 s reference run, shared across the suite."""
    return run(reference_config)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
