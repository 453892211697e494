# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

from dataclasses import dataclass, field

import numpy as np
import sgtk

from . import constants
from .errors import SignalError

logger = sgtk.LogManager.get_logger(__name__)

TRANSPARENT = "transparent"
MARGINAL = "marginal"
AUDIBLE = "audible"


@dataclass
class BoxStats:
    """Five-number summary with Tukey whiskers of a set of dB values."""

    median: float
    q1: float
    q3: float
    iqr: float
    whisker_low: float
    whisker_high: float
    outliers: list = field(default_factory=list)
    n: int = 0


@dataclass
class JndVerdict:
    """Classification of a level difference distribution against the JND."""

    jnd: float
    median_below: bool
    q3_below: bool
    classification: str


def gate_frames(lv, range_db=constants.DEFAULT_GATE_DB):
    """
    Select the frames loud enough to be analyzed: ``Lv >= max(Lv) - range_db``
    and above the track floor.

    :param lv: Level track of the virtual sound.
    :type lv: :class:`~auralab.dsp.LevelTrack`
    :param range_db: Dynamic range kept below the loudest frame.

    :rtype: numpy.ndarray of bool
    """

    values = np.asarray(lv.values, dtype=float)
    if values.size == 0:
        return np.zeros(0, dtype=bool)
    mask = values >= np.max(values) - range_db
    if lv.floor_db is not None:
        mask &= values > lv.floor_db
    return mask


def boxplot_stats(samples, iqr_multiplier=constants.WHISKER_IQR_MULTIPLIER):
    """
    Quartiles by linear interpolation of the order statistics at ``p * (n - 1)``,
    whiskers at the most extreme samples within ``iqr_multiplier * IQR`` of the
    quartiles, and every sample beyond the whiskers as an outlier.

    :param samples: dB values.
    :raises SignalError: For an empty sample set.
    :rtype: BoxStats
    """

    values = np.sort(np.asarray(samples, dtype=float).ravel())
    if values.size == 0:
        raise SignalError("boxplot_stats needs at least one sample")

    q1, median, q3 = np.percentile(values, [25.0, 50.0, 75.0])
    iqr = q3 - q1
    low_fence = q1 - iqr_multiplier * iqr
    high_fence = q3 + iqr_multiplier * iqr
    inside = values[(values >= low_fence) & (values <= high_fence)]
    whisker_low = float(inside[0])
    whisker_high = float(inside[-1])
    outliers = [float(v) for v in values if v < whisker_low or v > whisker_high]

    return BoxStats(
        median=float(median),
        q1=float(q1),
        q3=float(q3),
        iqr=float(iqr),
        whisker_low=whisker_low,
        whisker_high=whisker_high,
        outliers=outliers,
        n=int(values.size),
    )


def jnd_verdict(stats, jnd=constants.DEFAULT_JND_DB):
    """
    Transparent when both ``|median|`` and ``|q3|`` are below the JND, audible when
    ``|median|`` is not, marginal otherwise.

    :rtype: JndVerdict
    """

    median_below = abs(stats.median) < jnd
    q3_below = abs(stats.q3) < jnd
    if median_below and q3_below:
        classification = TRANSPARENT
    elif not median_below:
        classification = AUDIBLE
    else:
        classification = MARGINAL
    return JndVerdict(jnd, median_below, q3_below, classification)


def report_entry(stats, verdict, snr_median_db=None, n_frames=None):
    """JSON-ready report fields of one (room, stage) condition."""

    outliers = stats.outliers
    return {
        "median_db": stats.median,
        "q1_db": stats.q1,
        "q3_db": stats.q3,
        "whisker_low_db": stats.whisker_low,
        "whisker_high_db": stats.whisker_high,
        "n_outliers": len(outliers),
        "max_abs_outlier_db": max((abs(v) for v in outliers), default=None),
        "verdict": verdict.classification,
        "snr_median_db": snr_median_db,
        "n_frames": stats.n if n_frames is None else n_frames,
    }
