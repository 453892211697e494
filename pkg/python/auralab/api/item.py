# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

import numpy as np

from ..analysis import report_entry


class LabCondition(object):
    """
    Encapsulate one (laboratory room, virtual stage) combination of a run: the
    level tracks computed from its signals and the statistics derived from them.
    """

    def __init__(self, room, stage):
        """
        Class constructor.

        :param room:  Name of the laboratory room scene
        :param stage: Name of the virtual stage scene
        """

        self._room = room
        self._stage = stage
        self._tracks = {}
        self._gate = None
        self._stats = None
        self._verdict = None

    def __hash__(self):
        """Override the base method to allow LabCondition objects to be hashable."""

        return hash((self.room, self.stage))

    def __eq__(self, other):
        """
        Override the equality operator to allow comparing LabCondition objects.

        :param other: The other LabCondition to compare this one with.
        :type other: LabCondition
        """

        if not isinstance(other, LabCondition):
            return False

        return self.room == other.room and self.stage == other.stage

    def __repr__(self):
        return "<LabCondition %s>" % self.key

    # ----------------------------------------------------------------------------------------
    # Properties

    @property
    def room(self):
        """Get the name of the laboratory room."""
        return self._room

    @property
    def stage(self):
        """Get the name of the virtual stage."""
        return self._stage

    @property
    def key(self):
        """Get the report key of this condition, ``room/stage``."""
        return "%s/%s" % (self.room, self.stage)

    @property
    def directory(self):
        """Get the output sub-directory name of this condition."""
        return "%s_%s" % (self.room, self.stage)

    @property
    def tracks(self):
        """Get or set the level tracks by name (L_v, L_u, L_t, snr, delta_l)."""
        return self._tracks

    @tracks.setter
    def tracks(self, value):
        self._tracks = value

    @property
    def gate(self):
        """Get or set the boolean mask of analyzed frames."""
        return self._gate

    @gate.setter
    def gate(self, value):
        self._gate = value

    @property
    def stats(self):
        """Get or set the boxplot statistics of the gated level differences."""
        return self._stats

    @stats.setter
    def stats(self, value):
        self._stats = value

    @property
    def verdict(self):
        """Get or set the JND verdict."""
        return self._verdict

    @verdict.setter
    def verdict(self, value):
        self._verdict = value

    @property
    def gated_delta_l(self):
        """Get the level differences of the gated frames, the boxplot population."""
        if self._gate is None or "delta_l" not in self._tracks:
            return np.zeros(0)
        return self._tracks["delta_l"].values[self._gate]

    # ----------------------------------------------------------------------------------------
    # Public methods

    def to_dict(self):
        """
        Return the condition as its report entry.

        :return: The report fields as a dictionary, with null statistics when no
            frame passed the gate.
        """

        snr_median = None
        if "snr" in self._tracks and self._gate is not None and np.any(self._gate):
            snr_median = float(np.median(self._tracks["snr"].values[self._gate]))

        if self._stats is None:
            return {
                "median_db": None,
                "q1_db": None,
                "q3_db": None,
                "whisker_low_db": None,
                "whisker_high_db": None,
                "n_outliers": 0,
                "max_abs_outlier_db": None,
                "verdict": None,
                "snr_median_db": snr_median,
                "n_frames": 0,
            }
        return report_entry(self._stats, self._verdict, snr_median_db=snr_median)
