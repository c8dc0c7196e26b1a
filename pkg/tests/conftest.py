from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from dynsamp.frame_analysis import VectorSet
from dynsamp.operators import Spectrum


def random_system(rng: np.random.Generator, N: int, m: int, re=(1e-3, 10.0), im=10.0):
    lam = rng.uniform(*re, N) + 1j * rng.uniform(-im, im, N)
    g = rng.standard_normal((m, N)) + 1j * rng.standard_normal((m, N))
    return Spectrum(lam), VectorSet(g)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


finite = dict(allow_nan=False, allow_infinity=False)

disc_points = st.builds(
    lambda r, th: r * np.exp(1j * th),
    st.floats(0, 0.999, **finite),
    st.floats(-np.pi, np.pi, **finite),
)

halfplane_points = st.builds(
    complex,
    st.floats(1e-3, 1e3, **finite),
    st.floats(-1e3, 1e3, **finite),
)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
