import os
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

EX_Q = (0.9, 0.9, 0.6, 0.6, 0.6)
EX1_D = [
    [1, 0, 0, 0, 0],
    [0, 1, 0, 0, 0],
    [0, 0, 1, 0, 0],
    [0.4, 0.4, 0.2, 0, 0],
    [0.4, 0.3, 0.3, 0, 0],
]
GAME_U = [[0.6, 0.9], [0.8, 0.7]]  # x11 < x12, x21 > x22


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def random_profile(rng, n, density=0.5):
    """Row-stochastic matrix with random sparse support (diagonal kept possible)."""
    mask = rng.random((n, n)) < density
    mask[np.arange(n), rng.integers(0, n, n)] = True
    D = np.where(mask, rng.random((n, n)) + 0.05, 0.0)
    return D / D.sum(axis=1, keepdims=True)


accuracy_values = st.floats(0.5, 0.99, allow_nan=False)


@st.composite
def instances(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    q = draw(st.lists(accuracy_values, min_size=n, max_size=n))
    seed = draw(st.integers(0, 2**32 - 1))
    D = random_profile(np.random.default_rng(seed), n)
    return np.array(q), D


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.LINES:
            terminalreporter.write_line(line)
