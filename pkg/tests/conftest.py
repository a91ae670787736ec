import numpy as np
import pytest

from hystdyn import TimeSeries, babble


@pytest.fixture(scope="session")
def short_series() -> TimeSeries:
    """Two minutes of clean bidirectional babble; enough for quick fits."""
    return babble(120.0, seed=3)


@pytest.fixture(scope="session")
def short_uni_series() -> TimeSeries:
    return babble(120.0, seed=4, single_sided=True)


@pytest.fixture()
def tiny_series() -> TimeSeries:
    """Hand-sized series with easy numbers for window-layout checks."""
    n = 12
    t = np.arange(n, dtype=float)
    return TimeSeries(
        dt=0.5,
        u_a=(t % 4) / 4.0,
        u_b=(t % 3) / 3.0,
        temp_a=25.0 + 2.0 * t,
        temp_b=25.0 + 1.0 * t,
        theta=np.sin(t / 3.0) * 20.0,
    )
