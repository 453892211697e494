# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

import csv
from dataclasses import dataclass

import numpy as np
import sgtk
from scipy import signal

from . import constants
from .errors import SampleRateMismatchError, SignalError

logger = sgtk.LogManager.get_logger(__name__)


@dataclass
class Signal:
    """
    Sampled audio, shape (channels, samples), with 1 or 2 channels.

    Sample values are not checked for finiteness here; writers reject non-finite
    samples.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[None, :]
        if samples.ndim != 2 or samples.shape[0] not in (1, 2):
            raise SignalError("A signal has 1 or 2 channels, got shape %s" % (samples.shape,))
        if not self.sample_rate > 0:
            raise SignalError("Sample rate must be positive, got %r" % self.sample_rate)
        self.samples = samples

    @property
    def channels(self):
        return self.samples.shape[0]

    @property
    def length(self):
        return self.samples.shape[1]

    @property
    def duration(self):
        return self.length / float(self.sample_rate)

    def padded(self, length):
        """Copy zero-padded at the end to ``length`` samples."""
        if length < self.length:
            raise SignalError("Cannot pad %d samples down to %d" % (self.length, length))
        return Signal(
            np.pad(self.samples, ((0, 0), (0, length - self.length))), self.sample_rate
        )


@dataclass
class LevelTrack:
    """
    Short-time levels in dB, one value per hop. Difference tracks (SNR, level
    differences) have no floor.
    """

    values: np.ndarray
    hop: float
    window: float
    floor_db: float = constants.LEVEL_FLOOR_DB

    def __len__(self):
        return len(self.values)

    @property
    def times(self):
        """Start time of every frame in seconds."""
        return np.arange(len(self.values)) * self.hop

    def to_csv(self, path, mask=None):
        """
        Write the track with header ``t_s,value_db``.

        :param mask: Optional boolean frame selection; only the selected frames are
            written, with their own start times.
        """

        times, values = self.times, self.values
        if mask is not None:
            times, values = times[mask], values[mask]
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t_s", "value_db"])
            for t, value in zip(times, values):
                writer.writerow([repr(float(t)), repr(float(value))])


def _check_rates(a, b):
    if a.sample_rate != b.sample_rate:
        raise SampleRateMismatchError(
            "Sample rates differ: %d Hz and %d Hz" % (a.sample_rate, b.sample_rate)
        )


@sgtk.LogManager.log_timing
def convolve(x, h):
    """
    Full linear convolution of a mono signal with every channel of an impulse
    response.

    :param x: The dry signal, 1 channel.
    :type x: Signal
    :param h: Impulse response pair or 2-channel signal.

    :raises SampleRateMismatchError: When the sample rates differ.
    :raises SignalError: For a multi-channel or empty ``x``.
    :return: Signal of length ``len(x) + len(h) - 1`` with one channel per channel of ``h``.
    :rtype: Signal
    """

    _check_rates(x, h)
    if x.channels != 1:
        raise SignalError("Only mono signals can be convolved, got %d channels" % x.channels)
    if x.length == 0:
        raise SignalError("Cannot convolve an empty signal")
    responses = np.atleast_2d(h.samples)
    out = np.stack([signal.convolve(x.samples[0], response, method="auto") for response in responses])
    return Signal(out, x.sample_rate)


def mix(a, b):
    """
    Sample-wise sum, the shorter signal zero-padded.

    :raises SampleRateMismatchError: When the sample rates differ.
    :raises SignalError: When the channel counts differ.
    :rtype: Signal
    """

    _check_rates(a, b)
    if a.channels != b.channels:
        raise SignalError("Channel counts differ: %d and %d" % (a.channels, b.channels))
    length = max(a.length, b.length)
    return Signal(a.padded(length).samples + b.padded(length).samples, a.sample_rate)


def level_track(y, window=constants.DEFAULT_WINDOW, hop=None, floor_db=constants.LEVEL_FLOOR_DB):
    """
    Moving-average level in dBFS: ``10 * log10`` of the mean of ``y**2`` over the
    window and over channels, clamped at ``floor_db``. Frames start every hop;
    an incomplete last frame is dropped. A signal shorter than one window gives a
    single frame averaged over its samples.

    :param y: The signal.
    :type y: Signal
    :param window: Window length in seconds.
    :param hop: Hop in seconds; defaults to the window.
    :param floor_db: Lower clamp.

    :raises SignalError: For an empty signal or a window below 2 samples.
    :rtype: LevelTrack
    """

    hop = window if hop is None else hop
    if y.length == 0:
        raise SignalError("Cannot compute levels of an empty signal")
    window_samples = int(round(window * y.sample_rate))
    hop_samples = int(round(hop * y.sample_rate))
    if window_samples < 2 or hop_samples < 1:
        raise SignalError(
            "Window of %g s is shorter than 2 samples at %d Hz" % (window, y.sample_rate)
        )

    power = np.mean(y.samples**2, axis=0)
    if y.length < window_samples:
        mean_square = power.mean(keepdims=True)
    else:
        frames = np.lib.stride_tricks.sliding_window_view(power, window_samples)[::hop_samples]
        mean_square = frames.mean(axis=1)
    floor = 10.0 ** (floor_db / 10.0)
    values = 10.0 * np.log10(np.maximum(mean_square, floor))
    return LevelTrack(values, hop, window, floor_db)


def _difference(a, b, name):
    if len(a) != len(b) or a.hop != b.hop or a.window != b.window:
        raise SignalError(
            "%s needs tracks of equal length, hop and window (%d/%g/%g vs %d/%g/%g)"
            % (name, len(a), a.hop, a.window, len(b), b.hop, b.window)
        )
    return LevelTrack(a.values - b.values, a.hop, a.window, floor_db=None)


def snr_track(lv, lu):
    """Frame-wise ``L_v - L_u``, unclamped."""
    return _difference(lv, lu, "SNR")


def delta_l_track(lt, lv):
    """Frame-wise ``L_t - L_v``, unclamped."""
    return _difference(lt, lv, "Level difference")
