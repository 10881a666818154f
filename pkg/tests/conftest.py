import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

# filled by the acceptance tests, echoed at the end of the run
ACCEPTANCE_LINES = []

from mopuc.harness import random_contraction  # noqa: E402
from mopuc.opuc import VerblunskySequence, bernstein_szego_measure  # noqa: E402


def random_unitary(rng, p):
    q, r = np.linalg.qr(rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_alpha(rng, p, N, cap=0.8):
    return VerblunskySequence(np.stack([random_contraction(rng, p, cap) for _ in range(N)]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def bs_half():
    """Scalar Bernstein-Szego measure with the single coefficient 0.5."""
    return bernstein_szego_measure(VerblunskySequence.from_list([0.5]), 4096)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
