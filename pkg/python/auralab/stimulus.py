# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

"""
Built-in synthetic excerpt used when no anechoic recording is given: a seeded
sequence of band-limited pulse trains in the viola range, with short rests
between phrases. Every note sums its harmonics up to 10 kHz with equal
amplitude, so each period is a single short pulse.
"""

import numpy as np
import sgtk

from . import constants
from .dsp import Signal

logger = sgtk.LogManager.get_logger(__name__)

STIMULUS_SEED = 1735
STIMULUS_DURATION = 6.0
NOTE_DURATION = 0.25
NOTES_PER_PHRASE = 6
PEAK = 0.5

# C3 to A5, a diatonic scale over the viola range (Hz)
_SCALE = 130.8128 * 2.0 ** (np.array([0, 2, 4, 5, 7, 9, 11, 12, 14, 16, 17, 19, 21, 23, 24, 26, 28, 29, 31, 33]) / 12.0)

_ATTACK = 0.02
_RELEASE = 0.05
_MAX_HARMONIC_HZ = 10000.0


def _note(frequency, sample_rate, length):
    t = np.arange(length) / float(sample_rate)
    n_harmonics = int(min(_MAX_HARMONIC_HZ, 0.45 * sample_rate) // frequency)
    k = np.arange(1, n_harmonics + 1)
    tone = np.cos(2.0 * np.pi * np.outer(t, k) * frequency).sum(axis=1) / n_harmonics

    envelope = np.ones(length)
    attack = int(_ATTACK * sample_rate)
    release = int(_RELEASE * sample_rate)
    envelope[:attack] = np.linspace(0.0, 1.0, attack, endpoint=False)
    envelope[length - release:] = np.linspace(1.0, 0.0, release)
    return tone * envelope


def synthetic_excerpt(
    sample_rate=constants.DEFAULT_SAMPLE_RATE,
    duration=STIMULUS_DURATION,
    seed=STIMULUS_SEED,
):
    """
    Generate the synthetic excerpt.

    :param sample_rate: Sample rate in Hz.
    :param duration: Length in seconds.
    :param seed: Seed of the note sequence.

    :return: Mono signal peaking at 0.5 full scale.
    :rtype: :class:`~auralab.dsp.Signal`
    """

    rng = np.random.default_rng(seed)
    total = int(round(duration * sample_rate))
    note_length = int(round(NOTE_DURATION * sample_rate))
    samples = np.zeros(total)

    position = 0
    slot = 0
    while position + note_length <= total:
        # every phrase ends with a rest
        if slot % (NOTES_PER_PHRASE + 1) != NOTES_PER_PHRASE:
            frequency = _SCALE[rng.integers(len(_SCALE))]
            samples[position:position + note_length] = _note(frequency, sample_rate, note_length)
        position += note_length
        slot += 1

    peak = np.max(np.abs(samples))
    if peak > 0.0:
        samples *= PEAK / peak
    logger.debug("Generated %.2f s synthetic excerpt (seed %d)" % (duration, seed))
    return Signal(samples, sample_rate)
