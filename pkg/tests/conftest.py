import numpy as np
import pytest

from bspd.sysmodel import SystemConfig


@pytest.fixture
def ref_cfg():
    """The full-scale reference configuration used by the experiment harness."""
    return SystemConfig()


@pytest.fixture
def small_cfg():
    """Reduced geometry for fast Monte Carlo tests."""
    return SystemConfig(n_antennas=64, n_rf=6, n_subcarriers=96, pilot_slots=6,
                        carrier_hz=100e9, bandwidth_hz=15e9, n_paths=2,
                        window_halfwidth=3)


@pytest.fixture
def narrowband_cfg():
    """Zero-bandwidth geometry where every subcarrier shares one direction."""
    return SystemConfig(n_antennas=64, n_rf=8, n_subcarriers=32, pilot_slots=6,
                        carrier_hz=100e9, bandwidth_hz=0.0, n_paths=2,
                        window_halfwidth=2)


def complex_randn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
