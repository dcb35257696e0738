import numpy as np
import pytest

from mreg import Image, PairedDataset


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(rng, h=8, w=8, channels=1):
    return Image(rng.random((channels, h, w)))


def random_dataset(rng, n=4, h=8, w=8, channels=1, task_name="test-task"):
    pairs = tuple(
        (random_image(rng, h, w, channels), random_image(rng, h, w, channels))
        for _ in range(n)
    )
    return PairedDataset(pairs=pairs, task_name=task_name)


@pytest.fixture
def small_dataset(rng):
    return random_dataset(rng, n=4, h=6, w=5, channels=1)


@pytest.fixture
def rgb_dataset(rng):
    return random_dataset(rng, n=3, h=6, w=6, channels=3)
