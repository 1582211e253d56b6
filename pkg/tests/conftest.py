import numpy as np
import pytest
from hypothesis import settings, strategies as st

settings.register_profile("shiftlab", deadline=None, max_examples=50, derandomize=True)
settings.load_profile("shiftlab")

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
complexes = st.builds(complex, finite, finite)


def coeff_arrays(min_size=1, max_size=24):
    return st.lists(complexes, min_size=min_size, max_size=max_size).map(
        lambda xs: np.array(xs, dtype=complex))


def disc_points(radius=0.9):
    return st.builds(lambda r, t: r * np.exp(1j * t), st.floats(0, radius), st.floats(0, 2 * np.pi))


seeds = st.integers(0, 2 ** 32 - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
