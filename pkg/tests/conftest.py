import os
from pathlib import Path

import numpy as np
import pytest

from softprune.nn import ArchSpec, init_autoencoder

ROOT = Path(__file__).resolve().parents[1]
MNIST_DIR = Path(os.environ.get("MNIST_DIR", ROOT / "data" / "mnist"))

TINY = ArchSpec(4, (3,), 2)


def mnist_available():
    return (MNIST_DIR / "train-images-idx3-ubyte").exists() and (MNIST_DIR / "t10k-images-idx3-ubyte").exists()


@pytest.fixture
def tiny_model():
    return init_autoencoder(TINY, seed=3)


@pytest.fixture
def small_arch():
    return ArchSpec(36, (12, 9), 6)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def record(criterion, passed, detail):
    ACCEPTANCE_LINES.append(f"AC{criterion:<2} {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
