# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

"""
WAV input and output. Only 16-bit PCM and 32-bit float RIFF/WAVE files are
supported.
"""

import os
import struct
from dataclasses import dataclass

import numpy as np
import sgtk
from scipy.io import wavfile

from .dsp import Signal
from .errors import (
    MalformedWavError,
    MissingWavError,
    UnsupportedEncodingError,
    WavPreconditionError,
    WavWriteError,
)

logger = sgtk.LogManager.get_logger(__name__)

FLOAT32 = "float32"
PCM16 = "int16"

# scipy reports encodings it cannot decode with these messages
_UNSUPPORTED_MESSAGES = ("Unknown wave file format", "Unsupported bit depth")


@dataclass(frozen=True)
class WavSpec:
    """Layout of a WAV file to write."""

    channels: int
    sample_rate: int
    encoding: str = FLOAT32

    def validate(self):
        if self.channels not in (1, 2):
            raise WavPreconditionError("WAV files have 1 or 2 channels, got %r" % self.channels)
        if not self.sample_rate > 0:
            raise WavPreconditionError("Sample rate must be positive, got %r" % self.sample_rate)
        if self.encoding not in (FLOAT32, PCM16):
            raise UnsupportedEncodingError("Cannot write '%s' WAV files" % self.encoding)


def read_wav(path):
    """
    Read a WAV file into a :class:`~auralab.dsp.Signal`. 16-bit samples are
    divided by 32768.

    :raises MissingWavError: When the file does not exist.
    :raises MalformedWavError: When the RIFF structure is broken or truncated.
    :raises UnsupportedEncodingError: For encodings other than PCM16 and float32.
    :rtype: Signal
    """

    if not os.path.isfile(path):
        raise MissingWavError("WAV file '%s' does not exist" % path)
    try:
        sample_rate, data = wavfile.read(path)
    except ValueError as error:
        if any(message in str(error) for message in _UNSUPPORTED_MESSAGES):
            raise UnsupportedEncodingError("'%s': %s" % (path, error))
        raise MalformedWavError("'%s': %s" % (path, error))
    except (EOFError, struct.error) as error:
        raise MalformedWavError("'%s': %s" % (path, error))

    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise UnsupportedEncodingError(
            "'%s' holds %s samples; only 16-bit PCM and 32-bit float are supported"
            % (path, data.dtype)
        )

    if samples.ndim == 1:
        samples = samples[:, None]
    samples = samples.T
    if samples.shape[0] not in (1, 2):
        raise UnsupportedEncodingError(
            "'%s' has %d channels; only mono and stereo are supported" % (path, samples.shape[0])
        )
    return Signal(samples, int(sample_rate))


def write_wav(path, sig, spec=None):
    """
    Write a signal as a RIFF/WAVE file. Float32 files are written without
    dithering; samples beyond full scale are counted and reported as a warning.

    :param path: Destination path.
    :param sig: The signal.
    :type sig: Signal
    :param spec: Layout to write; float32 with the signal's channels and rate by default.
    :type spec: WavSpec

    :raises WavPreconditionError: For non-finite samples or a layout that does not
        match the signal.
    :raises WavWriteError: When the destination is not writable.
    """

    if spec is None:
        spec = WavSpec(sig.channels, sig.sample_rate)
    spec.validate()
    if spec.channels != sig.channels or spec.sample_rate != sig.sample_rate:
        raise WavPreconditionError(
            "Signal (%d ch, %d Hz) does not match the WAV layout (%d ch, %d Hz)"
            % (sig.channels, sig.sample_rate, spec.channels, spec.sample_rate)
        )
    if not np.all(np.isfinite(sig.samples)):
        raise WavPreconditionError("Signal for '%s' contains non-finite samples" % path)

    clipped = int(np.count_nonzero(np.abs(sig.samples) > 1.0))
    if clipped:
        logger.warning("%d samples beyond full scale in %s" % (clipped, path))

    if spec.encoding == PCM16:
        data = np.clip(np.round(sig.samples * 32768.0), -32768, 32767).astype(np.int16)
    else:
        data = sig.samples.astype(np.float32)
    data = data[0] if spec.channels == 1 else data.T

    try:
        wavfile.write(path, spec.sample_rate, np.ascontiguousarray(data))
    except OSError as error:
        raise WavWriteError("Cannot write '%s': %s" % (path, error))
    logger.debug("Wrote %s (%d samples, %s)" % (path, sig.length, spec.encoding))
    return clipped
