"""Random hybrid combining matrices and noisy pilot synthesis.

Each pilot slot p applies a constant-modulus analog combiner A_p
(entries of magnitude exactly 1/sqrt(N), random phases) to the antenna
signal h_m + n_{m,p}. Stacking the P slots gives one observed column per
subcarrier:

    y_m = A_spat h_m + stacked(A_p n_{m,p}) = A_eff hbar_m + noise

where A_eff = A_spat F^H acts on the angle-domain channel. Noise enters
at the antennas and is colored by the combiner.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ParameterError
from .sysmodel import SystemConfig, angle_transform
from .channel import ChannelRealization


@dataclass(frozen=True)
class CombinerSet:
    """Per-slot combiners (P, N_RF, N), their row stack, and the effective matrix."""

    per_slot: np.ndarray
    stacked_spatial: np.ndarray
    effective: np.ndarray


@dataclass(frozen=True)
class PilotObservation:
    """Stacked received pilots Y (N_RF*P x M), the noise power, and the combiners used."""

    y: np.ndarray
    sigma2: float
    combiners: CombinerSet


def make_combiners(rng, cfg: SystemConfig) -> CombinerSet:
    """Draw P constant-modulus combiners with i.i.d. uniform phases.

    Phases are drawn in a single slot-major call so that a longer pilot
    sequence extends a shorter one drawn from the same generator state.
    """
    n = cfg.n_antennas
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(cfg.pilot_slots, cfg.n_rf, n))
    per_slot = np.exp(1j * phases) / np.sqrt(n)
    stacked = per_slot.reshape(cfg.pilot_slots * cfg.n_rf, n)
    effective = stacked @ angle_transform(n).conj().T
    for a in (per_slot, stacked, effective):
        a.setflags(write=False)
    return CombinerSet(per_slot, stacked, effective)


def snr_to_sigma2(snr_db: float) -> float:
    """Noise power for a unit-signal SNR definition: sigma^2 = 10^(-snr_db/10)."""
    return float(10.0 ** (-snr_db / 10.0))


def observe(ch: ChannelRealization, comb: CombinerSet, sigma2: float, rng) -> PilotObservation:
    """Synthesize the stacked pilot matrix Y with per-antenna noise.

    Slot p of column m is A_p (h_m + n_{m,p}) with n_{m,p} circular complex
    Gaussian, per-component variance sigma2. Noise is drawn in one
    slot-major call (re/im interleaved) so pilot extensions nest.
    """
    if sigma2 < 0:
        raise ParameterError("sigma2 must be non-negative")
    slots, (n, m) = comb.per_slot, ch.h_spatial.shape
    if slots.shape[2] != n:
        raise DimensionMismatchError(
            f"combiner antenna count {slots.shape[2]} != channel antenna count {n}")
    p = slots.shape[0]
    z = rng.standard_normal((p, n, m, 2))
    noise = np.sqrt(sigma2 / 2.0) * (z[..., 0] + 1j * z[..., 1])
    blocks = np.einsum("pij,pjm->pim", slots, ch.h_spatial[None, :, :] + noise)
    y = blocks.reshape(p * slots.shape[1], m)
    y.setflags(write=False)
    return PilotObservation(y, float(sigma2), comb)
