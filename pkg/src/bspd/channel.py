"""Multipath wideband channel sampling and assembly.

The channel at subcarrier m is the multipath sum

    h_m = sqrt(N/L) * sum_l g_l * exp(-j 2 pi tau_l f_m) * a(theta_{l,m})

with frequency-dependent spatial direction theta_{l,m} = (f_m / f_c) * psi_l.
Over a wide band this direction drift spreads each path across many
angle-domain samples (beam split); the angle-domain matrix is computed
numerically as F @ h_m so that it stays exactly unitary-consistent.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .sysmodel import SystemConfig, angle_transform, subcarrier_frequencies

DEFAULT_TAU_MAX = 20e-9  # seconds


@dataclass(frozen=True)
class PathComponent:
    """One propagation path: complex gain, delay, and direction sine."""

    gain: complex
    delay: float
    direction_sine: float


@dataclass(frozen=True)
class ChannelRealization:
    """Sampled paths plus the spatial and angle-domain channel matrices (N x M)."""

    paths: tuple
    h_spatial: np.ndarray
    h_angle: np.ndarray
    cfg: SystemConfig


def sample_paths(rng, cfg: SystemConfig, tau_max: float = DEFAULT_TAU_MAX,
                 direction_sines=None) -> list:
    """Draw L path components.

    Gains are i.i.d. circular complex Gaussian with unit variance, physical
    angles uniform on (-pi/2, pi/2) mapped through sine, delays uniform on
    [0, tau_max]. Passing direction_sines pins the directions (used by
    on-grid experiments) while gains and delays stay random.
    """
    if tau_max <= 0:
        raise ParameterError("tau_max must be positive")
    n_paths = cfg.n_paths
    if direction_sines is None:
        sines = np.sin(rng.uniform(-np.pi / 2, np.pi / 2, size=n_paths))
    else:
        sines = np.asarray(direction_sines, dtype=float)
        if sines.shape != (n_paths,):
            raise ParameterError(
                f"expected {n_paths} direction sines, got {sines.shape}")
        if np.any(np.abs(sines) >= 1):
            raise ParameterError("direction sines must lie in (-1, 1)")
    z = rng.standard_normal((n_paths, 2))
    gains = (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2)
    delays = rng.uniform(0.0, tau_max, size=n_paths)
    return [PathComponent(complex(g), float(t), float(s))
            for g, t, s in zip(gains, delays, sines)]


def spatial_direction(psi: float, f_m, f_c: float):
    """Frequency-scaled direction theta = (f_m / f_c) * psi."""
    if f_c <= 0:
        raise ParameterError("f_c must be positive")
    return (np.asarray(f_m, dtype=float) / f_c) * psi


def assemble_channel(paths, cfg: SystemConfig) -> ChannelRealization:
    """Build the N x M spatial channel and its angle-domain transform."""
    if not paths:
        raise ParameterError("paths must be non-empty")
    n = cfg.n_antennas
    freqs = subcarrier_frequencies(cfg)
    k = np.arange(n)
    h = np.zeros((n, cfg.n_subcarriers), dtype=complex)
    for p in paths:
        theta = spatial_direction(p.direction_sine, freqs, cfg.carrier_hz)
        delay_phase = np.exp(-2j * np.pi * p.delay * freqs)
        steer = np.exp(-1j * np.pi * np.outer(k, theta)) / np.sqrt(n)
        h += (p.gain * delay_phase)[None, :] * steer
    h *= np.sqrt(n / len(paths))
    h_angle = angle_transform(n) @ h
    return ChannelRealization(tuple(paths), h, h_angle, cfg)


def direction_response(psi: float, cfg: SystemConfig) -> np.ndarray:
    """Angle-domain response of a unit-gain zero-delay path: column m is F @ a(theta_m).

    Every column has unit norm; its power concentrates around the grid
    sample nearest (f_m / f_c) * psi, drifting with m under beam split.
    """
    n = cfg.n_antennas
    freqs = subcarrier_frequencies(cfg)
    theta = spatial_direction(psi, freqs, cfg.carrier_hz)
    steer = np.exp(-1j * np.pi * np.outer(np.arange(n), theta)) / np.sqrt(n)
    return angle_transform(n) @ steer


def dirichlet_kernel(x, n_antennas: int):
    """Periodic sinc kernel sin(N pi x / 2) / sin(pi x / 2).

    The removable singularity where x is an integer multiple of 2 is
    assigned the peak value N. The kernel's square has period 2 and
    integrates to 2N over one period.
    """
    x = np.asarray(x, dtype=float)
    half = 0.5 * np.pi * x
    num = np.sin(n_antennas * half)
    den = np.sin(half)
    singular = np.isclose(x, 2.0 * np.round(x / 2.0), rtol=0.0, atol=1e-12)
    out = np.full(np.broadcast(num, den).shape, float(n_antennas))
    np.divide(num, den, out=out, where=~singular)
    if out.ndim == 0:
        return float(out)
    return out
