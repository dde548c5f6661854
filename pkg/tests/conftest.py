import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("orbilab", deadline=None, max_examples=60)
settings.load_profile("orbilab")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
