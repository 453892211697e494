# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

import csv

import numpy as np
import pytest

from auralab import constants
from auralab.errors import GeometryError
from auralab.ism import arrivals_to_csv, image_sources, ism_arrivals
from auralab.scene import (
    SHOEBOX_WALLS,
    Directivity,
    Material,
    ReceiverSpec,
    Scene,
    Shoebox,
    SourceSpec,
    preset_scene,
)


def mirror_oracle(room, source, max_order):
    """
    Enumerate every sequence of wall mirrorings up to ``max_order`` and keep the
    shortest sequence per distinct position.

    :return: {rounded position: (position, per-wall counts)}
    """

    dims = room.dimensions
    start = (np.asarray(source, dtype=float), (0,) * 6)
    found = {_key(start[0]): start}
    frontier = [start]
    for _ in range(max_order):
        next_frontier = []
        for position, counts in frontier:
            for wall in range(6):
                axis, high = divmod(wall, 2)
                mirrored = position.copy()
                plane = dims[axis] if high else 0.0
                mirrored[axis] = 2.0 * plane - position[axis]
                new_counts = list(counts)
                new_counts[wall] += 1
                key = _key(mirrored)
                if key not in found:
                    found[key] = (mirrored, tuple(new_counts))
                    next_frontier.append(found[key])
        frontier = next_frontier
    return found


def _key(position):
    return tuple(np.round(position, 6))


def _random_walls(rng):
    return {
        wall: Material(
            absorption=tuple(float(a) for a in rng.uniform(0.0, 0.95, constants.NUM_BANDS)),
            scattering=(0.0,) * constants.NUM_BANDS,
        )
        for wall in SHOEBOX_WALLS
    }


@pytest.mark.parametrize("max_order,count", [(0, 1), (1, 7), (2, 25), (3, 63)])
def test_image_count(booth1, max_order, count):
    images = image_sources(booth1.room, booth1.source.position, max_order)
    assert len(images) == count
    assert len({image.position for image in images}) == count
    assert images[0].order == 0
    assert images[0].position == booth1.source.position
    assert all(image.order <= max_order for image in images)


@pytest.mark.parametrize("trial", range(20))
@pytest.mark.parametrize("max_order", [1, 2, 3])
def test_arrivals_match_mirror_oracle(rng, trial, max_order):
    for _ in range(trial):
        rng.random()
    dims = rng.uniform(1.5, 8.0, size=3)
    source = rng.uniform(0.1, 0.9, size=3) * dims
    receiver = rng.uniform(0.1, 0.9, size=3) * dims
    materials = _random_walls(rng)
    scene = Scene(
        room=Shoebox(float(dims[0]), float(dims[1]), float(dims[2]), SHOEBOX_WALLS),
        materials=materials,
        source=SourceSpec(tuple(source)),
        receiver=ReceiverSpec(tuple(receiver)),
    )

    oracle = mirror_oracle(scene.room, source, max_order)
    images = image_sources(scene.room, source, max_order)
    assert {_key(np.array(image.position)) for image in images} == set(oracle)
    for image in images:
        position, counts = oracle[_key(np.array(image.position))]
        np.testing.assert_allclose(image.position, position, rtol=1e-12, atol=1e-12)
        assert image.reflection_counts == counts

    arrivals = ism_arrivals(scene, max_order)
    expected = []
    for position, counts in oracle.values():
        distance = np.linalg.norm(receiver - position)
        amplitude = np.ones(constants.NUM_BANDS) / distance
        for wall, count in zip(SHOEBOX_WALLS, counts):
            amplitude = amplitude * (1.0 - np.array(materials[wall].absorption)) ** (count / 2.0)
        expected.append((distance / 343.0, amplitude))
    expected.sort(key=lambda item: item[0])

    assert len(arrivals) == len(expected)
    for arrival, (delay, amplitude) in zip(arrivals, expected):
        assert arrival.delay == pytest.approx(delay, rel=1e-12)
        np.testing.assert_allclose(arrival.amplitude, amplitude, rtol=1e-12)
        assert np.linalg.norm(arrival.direction) == pytest.approx(1.0, abs=1e-9)


def test_direct_arrival_delay(booth1):
    scene = Scene(
        booth1.room,
        booth1.materials,
        SourceSpec((0.5, 1.0, 1.0)),
        ReceiverSpec((1.5, 1.0, 1.0)),
    )
    arrivals = ism_arrivals(scene, 1)
    direct = arrivals[0]
    assert direct.order == 0
    assert direct.delay == pytest.approx(1.0 / 343.0)
    assert direct.delay * 1000.0 == pytest.approx(2.915, abs=5e-4)
    np.testing.assert_allclose(direct.amplitude, 1.0)

    # one reflection off an alpha = 0.5 wall
    for arrival in arrivals[1:]:
        distance = arrival.delay * scene.speed_of_sound
        np.testing.assert_allclose(arrival.amplitude * distance, np.sqrt(0.5))


def test_skip_direct(booth1):
    full = ism_arrivals(booth1, 2)
    skipped = ism_arrivals(booth1, 2, skip_direct=True)
    assert len(skipped) == len(full) - 1
    assert all(arrival.order > 0 for arrival in skipped)
    remaining = [arrival for arrival in full if arrival.order > 0]
    for a, b in zip(remaining, skipped):
        assert a.delay == b.delay
        np.testing.assert_array_equal(a.amplitude, b.amplitude)
        np.testing.assert_array_equal(a.direction, b.direction)


def test_arrivals_sorted(random_shoebox):
    arrivals = ism_arrivals(random_shoebox(), 3)
    delays = [arrival.delay for arrival in arrivals]
    assert delays == sorted(delays)
    assert arrivals[0].order == 0
    assert arrivals[0].delay < arrivals[1].delay


def test_amplitude_monotone_in_absorption(shoebox_scene):
    low = ism_arrivals(shoebox_scene(absorption=0.2), 3)
    high = ism_arrivals(shoebox_scene(absorption=0.6), 3)
    for a, b in zip(low, high):
        assert a.delay == b.delay
        assert np.all(np.abs(b.amplitude) <= np.abs(a.amplitude))


def test_air_absorption(shoebox_scene):
    dry = ism_arrivals(shoebox_scene(air=0.0), 1)
    damped = ism_arrivals(shoebox_scene(air=0.05), 1)
    for a, b in zip(dry, damped):
        distance = a.delay * 343.0
        np.testing.assert_allclose(b.amplitude, a.amplitude * 10.0 ** (-0.05 * distance / 20.0))


def test_directivity_follows_first_leg(booth1):
    # gain 1 toward +x, 0 toward -x
    directivity = Directivity(
        azimuths=(0.0, 180.0),
        elevations=(0.0,),
        gains=(((1.0,) * 8,), ((0.0,) * 8,)),
    )
    scene = Scene(
        booth1.room,
        booth1.materials,
        SourceSpec((0.5, 1.0, 1.0), directivity),
        ReceiverSpec((1.5, 1.0, 1.0)),
    )
    arrivals = ism_arrivals(scene, 1)
    by_direction = {tuple(np.round(a.direction, 9)): a for a in arrivals if a.order == 1}
    # the x0 image path leaves the source toward -x
    np.testing.assert_array_equal(by_direction[(-1.0, 0.0, 0.0)].amplitude, 0.0)
    # the x1 image path leaves toward +x
    assert np.all(by_direction[(1.0, 0.0, 0.0)].amplitude > 0.0)


def test_image_sources_errors(booth1):
    with pytest.raises(GeometryError):
        image_sources(booth1.room.to_mesh(), booth1.source.position, 1)
    with pytest.raises(GeometryError):
        image_sources(booth1.room, booth1.source.position, -1)
    with pytest.raises(GeometryError):
        image_sources(booth1.room, (3.0, 1.0, 1.0), 1)
    with pytest.raises(GeometryError):
        ism_arrivals(preset_scene("stage_small"), 1)


def test_arrivals_to_csv(booth1, tmp_path):
    arrivals = ism_arrivals(booth1, 1)
    path = tmp_path / "arrivals.csv"
    arrivals_to_csv(arrivals, str(path))
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0][:5] == ["delay_s", "order", "dir_x", "dir_y", "dir_z"]
    assert len(rows[0]) == 5 + constants.NUM_BANDS
    assert len(rows) == 1 + len(arrivals)
    assert float(rows[1][0]) == arrivals[0].delay
