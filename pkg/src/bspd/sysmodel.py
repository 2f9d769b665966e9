"""System parameters, the angle-domain grid, steering vectors, and the unitary transform.

Grid indices are 1-based throughout the package: the angle samples are
theta_bar(n) = (2n - N - 1) / N for n = 1..N, so index n maps to python
position n - 1 inside arrays.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ParameterError

LIGHT_SPEED = 2.99792458e8  # m/s


@dataclass(frozen=True)
class SystemConfig:
    """Scalar parameters of the uplink pilot system.

    Defaults are the reference wideband setup used by the experiment
    harness: a 256-antenna ULA with 8 RF chains observing 512 subcarriers
    spread over 15 GHz around a 100 GHz carrier.
    """

    n_antennas: int = 256
    n_rf: int = 8
    n_subcarriers: int = 512
    n_users: int = 8
    pilot_slots: int = 10
    carrier_hz: float = 100e9
    bandwidth_hz: float = 15e9
    n_paths: int = 3
    window_halfwidth: int = 4
    light_speed: float = LIGHT_SPEED

    def __post_init__(self):
        if self.n_antennas < 1:
            raise ParameterError("n_antennas must be >= 1")
        if not 1 <= self.n_rf <= self.n_antennas:
            raise ParameterError("n_rf must satisfy 1 <= n_rf <= n_antennas")
        if self.n_subcarriers < 1:
            raise ParameterError("n_subcarriers must be >= 1")
        if self.n_users < 1:
            raise ParameterError("n_users must be >= 1")
        if self.pilot_slots < 1:
            raise ParameterError("pilot_slots must be >= 1")
        if self.n_paths < 1:
            raise ParameterError("n_paths must be >= 1")
        if self.carrier_hz <= 0:
            raise ParameterError("carrier_hz must be positive")
        if not 0 <= self.bandwidth_hz < self.carrier_hz:
            raise ParameterError("bandwidth_hz must satisfy 0 <= B < carrier_hz")
        if not 0 <= self.window_halfwidth <= (self.n_antennas - 1) / 2:
            raise ParameterError("window_halfwidth must satisfy 0 <= delta <= (N-1)/2")
        if self.light_speed != LIGHT_SPEED:
            raise ParameterError("light_speed is a fixed physical constant")

    @property
    def antenna_spacing(self) -> float:
        """Element spacing d = c / (2 f_c), derived, half-wavelength at the carrier."""
        return self.light_speed / (2.0 * self.carrier_hz)

    @property
    def n_observations(self) -> int:
        """Rows of the stacked pilot observation, N_RF * P."""
        return self.n_rf * self.pilot_slots


@dataclass(frozen=True)
class AngleGrid:
    """The N angle-domain samples theta_bar(n), strictly increasing with spacing 2/N."""

    values: np.ndarray

    @property
    def size(self) -> int:
        return self.values.size

    def theta(self, n: int) -> float:
        """Grid value at 1-based index n."""
        if not 1 <= n <= self.size:
            raise ParameterError(f"grid index {n} outside 1..{self.size}")
        return float(self.values[n - 1])


def angle_grid(n_antennas: int) -> AngleGrid:
    """Angle samples theta_bar(n) = (2n - N - 1) / N for n = 1..N."""
    if n_antennas < 1:
        raise ParameterError("n_antennas must be >= 1")
    n = np.arange(1, n_antennas + 1)
    values = (2 * n - n_antennas - 1) / n_antennas
    values.setflags(write=False)
    return AngleGrid(values)


def subcarrier_frequencies(cfg: SystemConfig) -> np.ndarray:
    """Per-subcarrier frequencies f_m = f_c + (B/M)(m - 1 - (M-1)/2), m = 1..M.

    The comb is symmetric about the carrier: f_m + f_{M+1-m} = 2 f_c.
    """
    m = np.arange(1, cfg.n_subcarriers + 1)
    f = cfg.carrier_hz + (cfg.bandwidth_hz / cfg.n_subcarriers) * (m - 1 - (cfg.n_subcarriers - 1) / 2)
    f.setflags(write=False)
    return f


def steering_vector(theta: float, n_antennas: int) -> np.ndarray:
    """Unit-norm ULA steering vector with k-th entry exp(-j pi k theta) / sqrt(N).

    theta is a direction sine and may lie outside [-1, 1); the phase
    progression formula applies unchanged.
    """
    if n_antennas < 1:
        raise ParameterError("n_antennas must be >= 1")
    k = np.arange(n_antennas)
    return np.exp(-1j * np.pi * k * theta) / np.sqrt(n_antennas)


@lru_cache(maxsize=8)
def angle_transform(n_antennas: int) -> np.ndarray:
    """Unitary N x N angle transform; row n is the conjugate transpose of steering_vector(theta_bar(n)).

    Rows are orthonormal because the grid samples are spaced by exactly 2/N.
    The returned array is cached and read-only.
    """
    if n_antennas < 1:
        raise ParameterError("n_antennas must be >= 1")
    grid = angle_grid(n_antennas).values
    k = np.arange(n_antennas)
    f = np.exp(1j * np.pi * np.outer(grid, k)) / np.sqrt(n_antennas)
    f.setflags(write=False)
    return f


def nearest_grid_index(theta, n_antennas: int):
    """1-based index of the grid sample closest to theta, ties toward the smaller index.

    Matching is by plain absolute distance over indices 1..N: directions
    pushed past the grid edge by the wideband frequency ratio clamp to the
    nearest edge sample, they do not wrap.
    """
    k = 0.5 * (n_antennas * np.asarray(theta, dtype=float) + n_antennas + 1)
    idx = np.clip(np.ceil(k - 0.5), 1, n_antennas).astype(int)
    if idx.ndim == 0:
        return int(idx)
    return idx


def nearest_grid_index_periodic(theta, n_antennas: int):
    """1-based grid index minimizing the PERIODIC distance to theta.

    The angle response has period 2 in theta, so a direction pushed past a
    grid edge concentrates its power at the opposite edge; this is where the
    true per-subcarrier energy maximum lives. Ties break toward the smaller
    index, matching nearest_grid_index inside the grid span.
    """
    k = 0.5 * (n_antennas * np.asarray(theta, dtype=float) + n_antennas + 1)
    idx = ((np.ceil(k - 0.5).astype(int) - 1) % n_antennas) + 1
    if idx.ndim == 0:
        return int(idx)
    return idx
