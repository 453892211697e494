# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

import xml.etree.ElementTree as ElementTree

import numpy as np

from auralab.analysis import boxplot_stats
from auralab.dsp import LevelTrack
from auralab.svg import boxplot_svg, levels_svg

_NS = "{http://www.w3.org/2000/svg}"


def _parse(path):
    return ElementTree.parse(str(path)).getroot()


def test_boxplot(tmp_path):
    path = tmp_path / "box.svg"
    stats = boxplot_stats([0.0, 0.0, 0.0, 0.0, 10.0])
    boxplot_svg([("booth1/stage_small", stats), ("a<b", None)], str(path), jnd=1.0)

    root = _parse(path)
    assert root.tag == _NS + "svg"
    assert len(root.findall(_NS + "circle")) == len(stats.outliers)
    dashed = [line for line in root.findall(_NS + "line") if line.get("stroke-dasharray")]
    assert len(dashed) == 2
    labels = [text.text for text in root.findall(_NS + "text")]
    assert "booth1/stage_small" in labels
    assert "a<b" in labels


def test_boxplot_without_data(tmp_path):
    path = tmp_path / "empty.svg"
    boxplot_svg([], str(path))
    assert _parse(path).tag == _NS + "svg"


def test_levels(tmp_path):
    path = tmp_path / "levels.svg"
    tracks = {
        "Lv": LevelTrack(np.linspace(-20.0, -60.0, 3000), 0.002, 0.002),
        "Lu": LevelTrack(np.full(3000, -70.0), 0.002, 0.002),
    }
    levels_svg([("booth1/stage_small", tracks), ("anechoic/stage_small", tracks)], str(path))

    root = _parse(path)
    polylines = root.findall(_NS + "polyline")
    assert len(polylines) == 4
    # long tracks are thinned
    assert len(polylines[0].get("points").split()) < 3000
