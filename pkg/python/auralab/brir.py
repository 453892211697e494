# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

"""
Binaural room impulse response synthesis.

Deterministic arrivals become band-shaped impulses filtered by the HRTF pair of
their incidence direction. The ray-traced energy histogram is rendered as a
late field of Gaussian noise, one independent stream per (band, direction bin),
shaped by the histogram's energy envelope, confined to its octave and filtered
by the HRTF pair of the direction bin's centre.

Arrivals use the 513-tap FIR bank of :func:`band_filters`, which keeps their
timing. The late field is split with exact octave masks in the frequency
domain instead: over the length of a reverberation tail the short FIR bank
cannot hold the 62.5 Hz and 125 Hz octaves apart.

Directions handed to :func:`hrtf_lookup` are in the head frame: +x along the
look direction, +y toward the left ear and +z up.
"""

import functools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import sgtk
from scipy import signal

from . import constants
from .dsp import Signal
from .errors import GeometryError, NyquistError, SampleRateMismatchError, SceneError, SignalError
from .ism import Arrival
from .utils import direction_bin_centers, normalize, worker_count

logger = sgtk.LogManager.get_logger(__name__)

_FRACTIONAL_DELAY_HALF_WIDTH = 16


@dataclass
class HrtfSet:
    """
    Head-related transfer functions, either a parametric spherical head or a
    measured grid of FIR pairs.

    Use :meth:`parametric`, :meth:`grid` or :meth:`identity` to create one.
    """

    kind: str
    head_radius: float = constants.DEFAULT_HEAD_RADIUS
    speed_of_sound: float = constants.DEFAULT_SPEED_OF_SOUND
    directions: np.ndarray = None
    left: np.ndarray = None
    right: np.ndarray = None
    sample_rate: int = None

    def __post_init__(self):
        if self.kind == "parametric":
            if not self.head_radius > 0.0:
                raise SceneError("Head radius must be positive, got %r" % self.head_radius)
            return
        if self.kind != "grid":
            raise SceneError("Unknown HRTF kind '%s'" % self.kind)

        self.directions = np.atleast_2d(np.asarray(self.directions, dtype=float))
        self.left = np.atleast_2d(np.asarray(self.left, dtype=float))
        self.right = np.atleast_2d(np.asarray(self.right, dtype=float))
        if self.directions.size == 0:
            raise SceneError("HRTF grid has no directions")
        norms = np.linalg.norm(self.directions, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise SceneError("HRTF grid directions must be unit vectors")
        if self.left.shape != self.right.shape or self.left.shape[0] != len(self.directions):
            raise SceneError("HRTF grid needs one left and one right FIR of equal length per direction")

    @classmethod
    def parametric(cls, head_radius=constants.DEFAULT_HEAD_RADIUS, speed_of_sound=constants.DEFAULT_SPEED_OF_SOUND):
        return cls("parametric", head_radius=head_radius, speed_of_sound=speed_of_sound)

    @classmethod
    def grid(cls, directions, left, right, sample_rate=None):
        return cls("grid", directions=directions, left=left, right=right, sample_rate=sample_rate)

    @classmethod
    def identity(cls):
        """A single-direction grid with unit filters; it passes signals to both ears unchanged."""
        return cls.grid([[1.0, 0.0, 0.0]], [[1.0]], [[1.0]])

    @property
    def fir_length(self):
        if self.kind == "parametric":
            return constants.HRTF_FIR_LENGTH
        return self.left.shape[1]

    @property
    def latency(self):
        """Bulk delay in samples built into every filter of the set."""
        if self.kind == "parametric":
            return constants.HRTF_BASE_DELAY
        return 0


@dataclass
class ImpulseResponsePair:
    """Two-channel impulse response (left and right ear)."""

    left: np.ndarray
    right: np.ndarray
    sample_rate: int = constants.DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        self.left = np.asarray(self.left, dtype=float)
        self.right = np.asarray(self.right, dtype=float)
        if self.left.ndim != 1 or self.left.shape != self.right.shape or len(self.left) < 1:
            raise SignalError("Impulse response channels must have equal length >= 1")

    @property
    def samples(self):
        return np.stack([self.left, self.right])

    def __len__(self):
        return len(self.left)

    def to_signal(self):
        return Signal(self.samples, self.sample_rate)

    @classmethod
    def from_signal(cls, sig):
        if sig.channels != 2:
            raise SignalError("An impulse response pair needs 2 channels, got %d" % sig.channels)
        return cls(sig.samples[0], sig.samples[1], sig.sample_rate)


def read_hrtf_grid(path):
    """
    Read an HRTF grid file.

    The header is ``HRTFGRID v1 <n_dirs> <fir_len> <sample_rate>``. Every direction
    then has two lines, left ear first, each holding the unit vector followed by
    ``fir_len`` whitespace-separated taps.

    :raises SceneError: When the file is missing or malformed.
    :rtype: HrtfSet
    """

    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = [l.split() for l in (line.strip() for line in handle) if l and not l.startswith("#")]
    except OSError as error:
        raise SceneError("Cannot read HRTF file '%s': %s" % (path, error))

    if not lines or len(lines[0]) != 5 or lines[0][:2] != ["HRTFGRID", "v1"]:
        raise SceneError("'%s' is not a HRTFGRID v1 file" % path)
    try:
        n_dirs, fir_len, sample_rate = (int(v) for v in lines[0][2:])
        rows = [[float(v) for v in row] for row in lines[1:]]
    except ValueError as error:
        raise SceneError("'%s': %s" % (path, error))
    if len(rows) != 2 * n_dirs or any(len(row) != 3 + fir_len for row in rows):
        raise SceneError(
            "'%s' must hold %d direction line pairs of %d taps" % (path, n_dirs, fir_len)
        )

    rows = np.array(rows)
    left_rows, right_rows = rows[0::2], rows[1::2]
    if not np.allclose(left_rows[:, :3], right_rows[:, :3]):
        raise SceneError("'%s': left and right lines disagree on a direction" % path)
    return HrtfSet.grid(left_rows[:, :3], left_rows[:, 3:], right_rows[:, 3:], sample_rate)


def load_hrtf(receiver, speed_of_sound=constants.DEFAULT_SPEED_OF_SOUND):
    """The HRTF set named by a receiver: parametric head or grid file."""

    if receiver.hrtf == "parametric":
        return HrtfSet.parametric(receiver.head_radius, speed_of_sound)
    return read_hrtf_grid(receiver.hrtf)


def to_head_frame(directions, look=(1.0, 0.0, 0.0), up=(0.0, 0.0, 1.0)):
    """Express world-frame directions in the head frame of a listener."""

    look = np.asarray(look, dtype=float)
    up = np.asarray(up, dtype=float)
    left = np.cross(up, look)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    return np.stack([directions @ look, directions @ left, directions @ up], axis=-1)


def woodworth_itd(hrtf, direction):
    """
    Interaural time difference ``(a / c) * (theta + sin(theta))`` in seconds, with
    ``theta`` the lateral angle. Positive when the left ear leads.
    """

    lateral = float(np.clip(normalize(direction)[1], -1.0, 1.0))
    theta = math.asin(lateral)
    return hrtf.head_radius / hrtf.speed_of_sound * (theta + math.sin(theta))


def _fractional_delay(delay, length):
    x = np.arange(length) - delay
    window = np.where(
        np.abs(x) < _FRACTIONAL_DELAY_HALF_WIDTH,
        0.5 * (1.0 + np.cos(np.pi * x / _FRACTIONAL_DELAY_HALF_WIDTH)),
        0.0,
    )
    return np.sinc(x) * window


def _head_shadow(cos_incidence, hrtf, sample_rate, length):
    """Impulse response of the first-order head-shadow filter of one ear."""

    theta = math.degrees(math.acos(float(np.clip(cos_incidence, -1.0, 1.0))))
    alpha_min = constants.HEAD_SHADOW_ALPHA_MIN
    alpha = (1.0 + alpha_min / 2.0) + (1.0 - alpha_min / 2.0) * math.cos(
        math.radians(theta / constants.HEAD_SHADOW_THETA_MIN_DEG * 180.0)
    )
    w0 = hrtf.speed_of_sound / hrtf.head_radius
    b, a = signal.bilinear([alpha / (2.0 * w0), 1.0], [1.0 / (2.0 * w0), 1.0], fs=sample_rate)
    impulse = np.zeros(length)
    impulse[0] = 1.0
    return signal.lfilter(b, a, impulse)


def _parametric_pair(hrtf, direction, sample_rate):
    direction = normalize(direction)
    length = constants.HRTF_FIR_LENGTH
    itd = woodworth_itd(hrtf, direction)
    half = itd * sample_rate / 2.0
    pair = []
    for ear_sign, delay in ((1.0, constants.HRTF_BASE_DELAY - half), (-1.0, constants.HRTF_BASE_DELAY + half)):
        shadow = _head_shadow(ear_sign * direction[1], hrtf, sample_rate, length)
        pair.append(np.convolve(shadow, _fractional_delay(delay, length))[:length])
    return pair[0], pair[1]


def hrtf_lookup(hrtf, direction, sample_rate=constants.DEFAULT_SAMPLE_RATE):
    """
    FIR pair for a head-frame direction.

    Grid sets return the pair of the nearest grid direction by angular distance,
    ties going to the lowest index. Parametric sets apply the Woodworth ITD as a
    windowed-sinc fractional delay around a fixed bulk delay and a first-order
    head-shadow filter per ear.

    :param hrtf: The HRTF set.
    :type hrtf: HrtfSet
    :param direction: Unit incidence direction in the head frame.
    :param sample_rate: Sample rate of the parametric filters.

    :return: (left FIR, right FIR)
    :rtype: tuple
    """

    if hrtf.kind == "parametric":
        return _parametric_pair(hrtf, np.asarray(direction, dtype=float), sample_rate)
    index = int(np.argmax(hrtf.directions @ normalize(direction)))
    return hrtf.left[index], hrtf.right[index]


def check_nyquist(sample_rate):
    """
    :raises NyquistError: When the sample rate cannot hold the upper edge of the
        highest octave band.
    """

    upper_edge = constants.BAND_CENTERS_HZ[-1] * math.sqrt(2.0)
    if sample_rate / 2.0 <= upper_edge:
        raise NyquistError(
            "Sample rate %d Hz is too low for the %g Hz band (needs > %.0f Hz)"
            % (sample_rate, constants.BAND_CENTERS_HZ[-1], 2.0 * upper_edge)
        )


@functools.lru_cache(maxsize=8)
def band_filters(sample_rate):
    """
    Zero-phase octave-band FIR filters, shape (bands, taps). They are built as
    differences of linear-phase low-pass prototypes and sum to a unit impulse at
    the centre tap.
    """

    check_nyquist(sample_rate)
    taps = constants.BAND_FILTER_TAPS
    edges = [f * math.sqrt(2.0) for f in constants.BAND_CENTERS_HZ[:-1]]
    lows = [signal.firwin(taps, edge, fs=sample_rate) for edge in edges]
    delta = np.zeros(taps)
    delta[taps // 2] = 1.0

    filters = [lows[0]]
    filters += [high - low for low, high in zip(lows[:-1], lows[1:])]
    filters.append(delta - lows[-1])
    filters = np.array(filters)
    filters.flags.writeable = False
    return filters


def arrival_kernel(amplitude, sample_rate):
    """Band-shaped impulse of one arrival, centred at tap ``taps // 2``."""
    return np.asarray(amplitude, dtype=float) @ band_filters(sample_rate)


def direct_path_arrival(scene):
    """
    The unobstructed source-to-receiver path.

    :raises GeometryError: When source and receiver are closer than 1e-6 m.
    :rtype: :class:`~auralab.ism.Arrival`
    """

    offset = np.asarray(scene.receiver.position, dtype=float) - np.asarray(scene.source.position, dtype=float)
    distance = float(np.linalg.norm(offset))
    if distance < 1e-6:
        raise GeometryError("Source and receiver coincide (%.3g m apart)" % distance)
    emission = offset / distance
    air = np.asarray(scene.air_absorption, dtype=float)
    amplitude = scene.source.gain(emission)[0] / distance * 10.0 ** (-air * distance / 20.0)
    return Arrival(
        delay=distance / scene.speed_of_sound,
        amplitude=amplitude,
        direction=-emission,
        order=0,
    )


class _Renderer(object):
    """Filter lookups and buffers shared by one synthesis."""

    def __init__(self, hrtf, sample_rate, look, up):
        if hrtf.sample_rate is not None and hrtf.sample_rate != sample_rate:
            raise SampleRateMismatchError(
                "HRTF set is sampled at %d Hz, synthesis runs at %d Hz" % (hrtf.sample_rate, sample_rate)
            )
        self.hrtf = hrtf
        self.sample_rate = sample_rate
        self.look = look
        self.up = up
        self.filters = band_filters(sample_rate)
        self.half = self.filters.shape[1] // 2

    def pair_for(self, world_direction):
        head = to_head_frame(world_direction, self.look, self.up)[0]
        return hrtf_lookup(self.hrtf, head, self.sample_rate)


def octave_masks(n_samples, sample_rate):
    """
    Boolean masks over the ``rfft`` bins of an ``n_samples`` buffer, shape
    (bands, n_samples // 2 + 1). Band ``b`` keeps the bins in
    ``[fc / sqrt(2), fc * sqrt(2))``; the masks are disjoint.
    """

    check_nyquist(sample_rate)
    freqs = np.fft.rfftfreq(n_samples, 1.0 / sample_rate)
    centers = np.asarray(constants.BAND_CENTERS_HZ)[:, None]
    return (freqs >= centers / math.sqrt(2.0)) & (freqs < centers * math.sqrt(2.0))


def _energy_envelope(energy, per_bin):
    """Per-sample energy density interpolated linearly between bin centres."""

    n_bins = len(energy)
    density = energy / float(per_bin)
    centers = (np.arange(n_bins) + 0.5) * per_bin
    return np.interp(np.arange(n_bins * per_bin) + 0.5, centers, density)


def late_field_bands(histogram, direction, sample_rate, seed, masks=None):
    """
    Late-field band signals of one direction bin, shape (bands, n_bins * samples
    per bin).

    Unit-variance Gaussian noise is amplitude-shaped by the interpolated energy
    envelope of the (band, direction) histogram cell, restricted to the band's
    octave and scaled so the stream carries the cell's total energy.
    """

    per_bin = max(1, int(round(histogram.bin_width * sample_rate)))
    n_samples = histogram.n_bins * per_bin
    if masks is None:
        masks = octave_masks(n_samples, sample_rate)
    out = np.zeros((histogram.bands, n_samples))
    for band in range(histogram.bands):
        energy = histogram.data[band, :, direction]
        target = float(np.sum(energy))
        if not target > 0.0:
            continue
        rng = np.random.default_rng([seed, band, direction])
        shaped = np.sqrt(_energy_envelope(energy, per_bin)) * rng.standard_normal(n_samples)
        stream = np.fft.irfft(np.fft.rfft(shaped) * masks[band], n=n_samples)
        power = float(np.sum(stream**2))
        if power > 0.0:
            out[band] = stream * math.sqrt(target / power)
        else:
            logger.debug("Band %d has no frequency bin in a %d-sample late field" % (band, n_samples))
    return out


def _active_directions(histogram):
    return [int(d) for d in np.flatnonzero(histogram.data.sum(axis=(0, 1)) > 0.0)]


@sgtk.LogManager.log_timing
def synthesize_brir(
    arrivals,
    histogram,
    hrtf,
    sample_rate=constants.DEFAULT_SAMPLE_RATE,
    seed=0,
    look=(1.0, 0.0, 0.0),
    up=(0.0, 0.0, 1.0),
):
    """
    Synthesize a binaural impulse response from arrivals and a late-field histogram.

    Each arrival is placed at sample ``round(delay * fs)``. Band-filter taps that
    would fall before the first sample are dropped. The bulk delay of the HRTF set
    is removed, so responses built with different sets stay aligned.

    :param arrivals: Deterministic arrivals, world-frame directions.
    :type arrivals: list[:class:`~auralab.ism.Arrival`]
    :param histogram: Energy histogram of the remaining paths, or None. It must not
        contain the orders already covered by ``arrivals``.
    :type histogram: :class:`~auralab.raytrace.EnergyHistogram`
    :param hrtf: HRTF set of the listener.
    :type hrtf: HrtfSet
    :param sample_rate: Output sample rate in Hz.
    :param seed: Seed of the late-field noise streams.
    :param look: Listener look direction (world frame).
    :param up: Listener up direction (world frame).

    :raises NyquistError: When ``sample_rate`` cannot hold the highest band.
    :raises SampleRateMismatchError: When a grid HRTF set has another sample rate.
    :rtype: ImpulseResponsePair
    """

    renderer = _Renderer(hrtf, sample_rate, look, up)
    fir_length = hrtf.fir_length
    latency = hrtf.latency

    positions = [int(round(a.delay * sample_rate)) - latency for a in arrivals]
    ends = [p + renderer.half + fir_length for p in positions]
    directions = _active_directions(histogram) if histogram is not None else []
    if directions:
        per_bin = max(1, int(round(histogram.bin_width * sample_rate)))
        ends.append(histogram.n_bins * per_bin + fir_length - 1 - latency)
    length = max([1] + ends)

    left = np.zeros(length)
    right = np.zeros(length)

    def add(offset, data, target):
        start = max(offset, 0)
        data = data[start - offset:]
        stop = min(start + len(data), length)
        if stop > start:
            target[start:stop] += data[: stop - start]

    for arrival, position in zip(arrivals, positions):
        kernel = arrival_kernel(arrival.amplitude, sample_rate)
        fir_left, fir_right = renderer.pair_for(arrival.direction)
        add(position - renderer.half, np.convolve(kernel, fir_left), left)
        add(position - renderer.half, np.convolve(kernel, fir_right), right)

    if directions:
        centers = direction_bin_centers()
        masks = octave_masks(histogram.n_bins * per_bin, sample_rate)

        def streams(direction):
            return late_field_bands(histogram, direction, sample_rate, seed, masks)

        workers = min(worker_count(), len(directions))
        with ThreadPoolExecutor(max_workers=workers) as executor:
            # independent streams of one band interfere; one gain per band restores
            # the band total of their sum
            summed = None
            for bands in executor.map(streams, directions):
                summed = bands if summed is None else summed + bands
            power = np.sum(summed**2, axis=1)
            del summed
            gains = np.sqrt(
                np.divide(histogram.band_totals(), power, out=np.zeros_like(power), where=power > 0.0)
            )

            def render(direction):
                carrier = gains @ streams(direction)
                fir_left, fir_right = renderer.pair_for(centers[direction])
                return (
                    signal.fftconvolve(carrier, fir_left),
                    signal.fftconvolve(carrier, fir_right),
                )

            rendered = list(executor.map(render, directions))
        # fixed summation order over direction bins
        for late_left, late_right in rendered:
            add(-latency, late_left, left)
            add(-latency, late_right, right)

    logger.debug(
        "Synthesized %d samples from %d arrivals and %d direction bins"
        % (length, len(arrivals), len(directions))
    )
    return ImpulseResponsePair(left, right, sample_rate)
