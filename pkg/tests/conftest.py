# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

import os
import sys

import numpy as np
import pytest

# Manually add the package to the path in order to import it in the test modules.
base_dir = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", "python"))
if base_dir not in sys.path:
    sys.path.insert(0, base_dir)

from auralab import constants  # noqa: E402
from auralab.dsp import Signal  # noqa: E402
from auralab.scene import (  # noqa: E402
    Material,
    ReceiverSpec,
    Scene,
    Shoebox,
    SourceSpec,
    preset_scene,
)


@pytest.fixture
def rng():
    """A seeded random generator, fresh for every test."""

    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def booth1():
    """The hearing booth 1 preset scene."""

    return preset_scene("booth1")


@pytest.fixture(scope="session")
def booth2():
    """The hearing booth 2 preset scene."""

    return preset_scene("booth2")


@pytest.fixture
def shoebox_scene():
    """
    Return a factory building shoebox scenes with a uniform wall material. The
    receiver faces +y and the source defaults to 1 m in front of it along x.
    """

    def make(
        dims=(4.0, 5.0, 3.0),
        absorption=0.3,
        scattering=0.0,
        source=(1.0, 2.0, 1.5),
        receiver=(2.0, 2.0, 1.5),
        air=0.0,
        name="box",
    ):
        return Scene(
            room=Shoebox(dims[0], dims[1], dims[2], ("wall",) * 6),
            materials={"wall": Material.uniform(absorption, scattering)},
            source=SourceSpec(tuple(float(v) for v in source)),
            receiver=ReceiverSpec(
                tuple(float(v) for v in receiver), look=(0.0, 1.0, 0.0), up=(0.0, 0.0, 1.0)
            ),
            air_absorption=(float(air),) * constants.NUM_BANDS,
            name=name,
        )

    return make


@pytest.fixture
def random_shoebox(rng):
    """
    Return a factory drawing a random shoebox scene with source and receiver at
    least 0.3 m away from every wall.
    """

    def make(absorption=None, scattering=0.0):
        dims = rng.uniform(2.0, 6.0, size=3)
        source = rng.uniform(0.3, dims - 0.3)
        receiver = rng.uniform(0.3, dims - 0.3)
        while np.linalg.norm(receiver - source) < 0.5:
            receiver = rng.uniform(0.3, dims - 0.3)
        alpha = rng.uniform(0.05, 0.9, size=constants.NUM_BANDS) if absorption is None else absorption
        material = Material(
            absorption=tuple(float(a) for a in np.broadcast_to(alpha, (constants.NUM_BANDS,))),
            scattering=(float(scattering),) * constants.NUM_BANDS,
        )
        return Scene(
            room=Shoebox(float(dims[0]), float(dims[1]), float(dims[2]), ("wall",) * 6),
            materials={"wall": material},
            source=SourceSpec(tuple(float(v) for v in source)),
            receiver=ReceiverSpec(tuple(float(v) for v in receiver)),
            name="random",
        )

    return make


@pytest.fixture
def sine():
    """
    Return a factory for a full-scale 1 kHz sine at 48 kHz. Every 2 ms window
    covers exactly two cycles.
    """

    def make(amplitude=1.0, duration=0.1, channels=1):
        t = np.arange(int(duration * 48000)) / 48000.0
        samples = amplitude * np.sin(2.0 * np.pi * 1000.0 * t)
        return Signal(np.tile(samples, (channels, 1)), 48000)

    return make


@pytest.fixture
def out_dir(tmp_path):
    """An empty output directory."""

    path = tmp_path / "out"
    path.mkdir()
    return str(path)
