import numpy as np
import pytest

from infodist.channels import Channel, Instrument
from infodist.linalg import DensityMatrix

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)

# binary entropy of 3/4, evaluated by hand: -(3/4)log2(3/4) - (1/4)log2(1/4)
H_THREE_QUARTERS = 0.75 * np.log2(4 / 3) + 0.25 * 2.0

# filled by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20061015)


@pytest.fixture
def depolarizing():
    return Channel.from_kraus([I2 / 2, SX / 2, SY / 2, SZ / 2])


@pytest.fixture
def diag_state():
    return DensityMatrix.diagonal([0.75, 0.25])


@pytest.fixture
def z_measurement():
    return Instrument.projective(np.eye(2))


@pytest.fixture
def x_measurement():
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([1, -1]) / np.sqrt(2)
    return Instrument.projective(np.column_stack([plus, minus]))


def random_hermitian(d, rng):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / 2
