import numpy as np
import pytest

from critcheck import Image


def rand_image(rng, w, h, channels=1, hi=256):
    return Image(rng.integers(0, hi, size=(h, w, channels), dtype=np.uint8))


def uniform_image(value, w, h, channels=1):
    return Image(np.full((h, w, channels), value, dtype=np.uint8))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
