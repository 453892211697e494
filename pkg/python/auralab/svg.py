# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

"""
Minimal SVG figures drawn from rect, line, circle, polyline and text elements.
"""

from xml.sax.saxutils import escape

import numpy as np
import sgtk

logger = sgtk.LogManager.get_logger(__name__)

_WIDTH = 720
_MARGIN = 60
_COLORS = ("#1f77b4", "#d62728", "#2ca02c")


class _Canvas(object):
    def __init__(self, width, height):
        self.width = width
        self.height = height
        self.elements = []

    def line(self, x1, y1, x2, y2, color="#000", width=1.0, dash=None):
        extra = ' stroke-dasharray="%s"' % dash if dash else ""
        self.elements.append(
            '<line x1="%.2f" y1="%.2f" x2="%.2f" y2="%.2f" stroke="%s" stroke-width="%.1f"%s/>'
            % (x1, y1, x2, y2, color, width, extra)
        )

    def rect(self, x, y, w, h, fill="#ddd", stroke="#000"):
        self.elements.append(
            '<rect x="%.2f" y="%.2f" width="%.2f" height="%.2f" fill="%s" stroke="%s"/>'
            % (x, y, w, h, fill, stroke)
        )

    def circle(self, x, y, r=3.0, stroke="#000"):
        self.elements.append(
            '<circle cx="%.2f" cy="%.2f" r="%.1f" fill="none" stroke="%s"/>' % (x, y, r, stroke)
        )

    def polyline(self, points, color):
        coords = " ".join("%.2f,%.2f" % p for p in points)
        self.elements.append(
            '<polyline points="%s" fill="none" stroke="%s" stroke-width="1"/>' % (coords, color)
        )

    def text(self, x, y, label, size=12, anchor="middle"):
        self.elements.append(
            '<text x="%.2f" y="%.2f" font-size="%d" text-anchor="%s">%s</text>'
            % (x, y, size, anchor, escape(str(label)))
        )

    def render(self):
        return "\n".join(
            ['<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d">' % (self.width, self.height)]
            + ['<rect width="100%" height="100%" fill="#fff"/>']
            + self.elements
            + ["</svg>", ""]
        )


def _scale(low, high, top, bottom):
    if high <= low:
        high = low + 1.0
    return lambda v: bottom - (v - low) / (high - low) * (bottom - top)


def _y_axis(canvas, y_of, low, high, left, label):
    for tick in np.linspace(low, high, 5):
        y = y_of(tick)
        canvas.line(left - 4, y, left, y)
        canvas.text(left - 6, y + 4, "%.1f" % tick, size=10, anchor="end")
    canvas.text(14, (canvas.height) / 2.0, label, size=11, anchor="start")


def boxplot_svg(groups, path, jnd=None, title="Level difference (dB)"):
    """
    Draw one box per group: box from q1 to q3, median line, whiskers and outlier
    circles.

    :param groups: List of (label, :class:`~auralab.analysis.BoxStats` or None).
    :param path: Destination file.
    :param jnd: Draw dashed reference lines at +/- jnd when given.
    """

    height = 420
    canvas = _Canvas(_WIDTH, height)
    top, bottom = _MARGIN, height - _MARGIN
    stats = [s for _, s in groups if s is not None]
    values = [0.0]
    for s in stats:
        values += [s.whisker_low, s.whisker_high] + list(s.outliers)
    if jnd is not None:
        values += [-jnd, jnd]
    low, high = min(values), max(values)
    pad = 0.05 * (high - low or 1.0)
    low, high = low - pad, high + pad
    y_of = _scale(low, high, top, bottom)

    canvas.text(_WIDTH / 2.0, 24, title, size=14)
    canvas.line(_MARGIN, top, _MARGIN, bottom)
    _y_axis(canvas, y_of, low, high, _MARGIN, "dB")
    if jnd is not None:
        for level in (-jnd, jnd):
            canvas.line(_MARGIN, y_of(level), _WIDTH - 20, y_of(level), color="#888", dash="4,3")

    slot = (_WIDTH - _MARGIN - 20) / float(max(len(groups), 1))
    for i, (label, s) in enumerate(groups):
        center = _MARGIN + slot * (i + 0.5)
        canvas.text(center, bottom + 18, label, size=10)
        if s is None:
            continue
        half = slot * 0.25
        canvas.line(center, y_of(s.whisker_low), center, y_of(s.q1))
        canvas.line(center, y_of(s.q3), center, y_of(s.whisker_high))
        canvas.line(center - half / 2, y_of(s.whisker_low), center + half / 2, y_of(s.whisker_low))
        canvas.line(center - half / 2, y_of(s.whisker_high), center + half / 2, y_of(s.whisker_high))
        canvas.rect(center - half, y_of(s.q3), 2 * half, max(y_of(s.q1) - y_of(s.q3), 0.5))
        canvas.line(center - half, y_of(s.median), center + half, y_of(s.median), width=2.0)
        for value in s.outliers:
            canvas.circle(center, y_of(value))

    _write(canvas, path)


def levels_svg(panels, path):
    """
    Draw level tracks over time, one panel per condition.

    :param panels: List of (label, {series name: :class:`~auralab.dsp.LevelTrack`}).
    :param path: Destination file.
    """

    panel_height = 180
    height = _MARGIN + panel_height * max(len(panels), 1)
    canvas = _Canvas(_WIDTH, height)
    canvas.text(_WIDTH / 2.0, 24, "Levels over time (dB)", size=14)

    for i, (label, series) in enumerate(panels):
        top = _MARGIN + i * panel_height
        bottom = top + panel_height - 40
        left, right = _MARGIN, _WIDTH - 120
        tracks = list(series.items())
        values = np.concatenate([t.values for _, t in tracks]) if tracks else np.zeros(1)
        low, high = float(np.min(values)), float(np.max(values))
        y_of = _scale(low, high, top, bottom)
        duration = max((len(t) * t.hop for _, t in tracks), default=1.0)

        canvas.text(left, top - 6, label, size=11, anchor="start")
        canvas.line(left, bottom, right, bottom)
        canvas.line(left, top, left, bottom)
        for tick in np.linspace(low, high, 3):
            canvas.text(left - 6, y_of(tick) + 4, "%.0f" % tick, size=9, anchor="end")
        canvas.text(right, bottom + 14, "%.2f s" % duration, size=9, anchor="end")

        for n, (name, track) in enumerate(tracks):
            color = _COLORS[n % len(_COLORS)]
            # thin long tracks to one point per horizontal pixel
            step = max(1, len(track) // (right - left))
            times = track.times[::step]
            points = [
                (left + t / duration * (right - left), y_of(v))
                for t, v in zip(times, track.values[::step])
            ]
            canvas.polyline(points, color)
            canvas.text(right + 10, top + 14 * (n + 1), name, size=10, anchor="start")
            canvas.line(right + 60, top + 14 * (n + 1) - 4, right + 90, top + 14 * (n + 1) - 4, color=color)

    _write(canvas, path)


def _write(canvas, path):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(canvas.render())
    logger.info("Wrote %s" % path)
