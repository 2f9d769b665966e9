"""Deterministic per-trial random streams.

Every Monte Carlo trial derives its generators from the experiment's base
seed through numpy's splittable SeedSequence, keyed by a (stream, trial)
spawn key, so results do not depend on execution order or worker count:

    (0, t)  channel and combiner draws of trial t
    (1, t)  pilot noise draws of trial t
    (2, 0)  the once-per-experiment channel realization of the
            fixed-direction detection experiment

Separating the noise stream keeps noise draws aligned when only the pilot
length changes between sweep points.
"""

import numpy as np

SAMPLE_STREAM = 0
NOISE_STREAM = 1
CHANNEL_STREAM = 2


def trial_seed(base_seed: int, trial: int, stream: int = SAMPLE_STREAM) -> np.random.SeedSequence:
    return np.random.SeedSequence(base_seed, spawn_key=(stream, trial))


def trial_streams(base_seed: int, trial: int):
    """(sample, noise) generators for one trial."""
    rng_sample = np.random.default_rng(trial_seed(base_seed, trial, SAMPLE_STREAM))
    rng_noise = np.random.default_rng(trial_seed(base_seed, trial, NOISE_STREAM))
    return rng_sample, rng_noise


def channel_stream(base_seed: int) -> np.random.SeedSequence:
    return trial_seed(base_seed, 0, CHANNEL_STREAM)
