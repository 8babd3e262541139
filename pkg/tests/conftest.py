import os
import random

import pytest

SEED = int(os.environ.get("L2MULT_SEED", "271828"))


@pytest.fixture
def rng():
    return random.Random(SEED)


def make_rng(offset: int = 0) -> random.Random:
    return random.Random(SEED + offset)
