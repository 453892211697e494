# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

import csv

import numpy as np
import pytest

from auralab import constants
from auralab.errors import OpenMeshError, SceneError, SignalError
from auralab.raytrace import (
    EnergyHistogram,
    decay_curve,
    fit_t60,
    histogram_to_csv,
    reflect,
    trace,
)
from auralab.scene import Mesh, Scene, eyring_rt, sabine_rt


def test_specular_reflection():
    incoming = np.array([-1.0, -1.0, 0.0]) / np.sqrt(2.0)
    out = reflect(incoming, np.array([0.0, 1.0, 0.0]), 0.0, np.array([0.3, 0.6, 0.9]))
    np.testing.assert_allclose(out, np.array([-1.0, 1.0, 0.0]) / np.sqrt(2.0), atol=1e-12)


def test_diffuse_reflection_follows_cosine_law(rng):
    n = 100000
    normal = np.tile([0.0, 0.0, 1.0], (n, 1))
    incoming = np.tile(np.array([1.0, 0.0, -1.0]) / np.sqrt(2.0), (n, 1))
    out = reflect(incoming, normal, 1.0, rng.random((n, 3)))

    np.testing.assert_allclose(np.linalg.norm(out, axis=1), 1.0)
    assert np.all(out[:, 2] > 0.0)
    mean = out.mean(axis=0)
    assert np.linalg.norm(mean[:2]) < 0.01
    # cosine-weighted hemisphere: E[cos] = 2/3, E[cos^2] = 1/2
    assert out[:, 2].mean() == pytest.approx(2.0 / 3.0, abs=0.005)
    assert (out[:, 2] ** 2).mean() == pytest.approx(0.5, abs=0.005)


def test_scattering_fraction(rng):
    n = 1000000
    normal = np.tile([0.0, 1.0, 0.0], (n, 1))
    incoming = np.tile(np.array([-1.0, -1.0, 0.0]) / np.sqrt(2.0), (n, 1))
    out = reflect(incoming, normal, 0.5, rng.random((n, 3)))
    specular = np.all(np.isclose(out, np.array([-1.0, 1.0, 0.0]) / np.sqrt(2.0)), axis=1)
    assert specular.mean() == pytest.approx(0.5, abs=0.002)
    assert np.all(out[:, 1] > 0.0)


def test_full_absorption(shoebox_scene):
    scene = shoebox_scene(absorption=1.0)
    histogram = trace(scene, 2000, seed=1, max_time=0.1, skip_direct=True)
    assert not np.any(histogram.data)


def test_direct_energy(shoebox_scene):
    # free-field energy of a unit source at 1 m is 1
    scene = shoebox_scene(absorption=1.0)
    histogram = trace(scene, 20000, seed=3, max_time=0.1)
    assert histogram.band_totals() == pytest.approx(np.ones(constants.NUM_BANDS), rel=0.25)
    # the receiver sphere is entered after 0.75 m
    energy = histogram.energy_decay()
    assert np.flatnonzero(energy).tolist() == [2]
    # the direct sound arrives from -x, the first direction bin
    assert np.flatnonzero(histogram.data[0, 2]).tolist() == [0]


def test_histogram_shape(shoebox_scene):
    histogram = trace(shoebox_scene(), 500, seed=2, max_time=0.05, bin_width=0.002)
    assert histogram.data.shape == (constants.NUM_BANDS, 25, 26)
    assert histogram.rays_emitted == 500
    assert histogram.seed == 2
    assert histogram.bin_width == 0.002
    assert np.all(np.isfinite(histogram.data))
    assert np.all(histogram.data >= 0.0)


def test_deterministic(shoebox_scene):
    scene = shoebox_scene(scattering=0.3)
    a = trace(scene, 5000, seed=7, max_time=0.2)
    b = trace(scene, 5000, seed=7, max_time=0.2)
    np.testing.assert_array_equal(a.data, b.data)
    c = trace(scene, 5000, seed=8, max_time=0.2)
    assert not np.array_equal(a.data, c.data)


@pytest.mark.parametrize("threads", ["1", "3"])
def test_independent_of_worker_count(shoebox_scene, monkeypatch, threads):
    scene = shoebox_scene(scattering=0.3)
    reference = trace(scene, 9000, seed=11, max_time=0.1)
    monkeypatch.setenv(constants.THREADS_ENV_VAR, threads)
    np.testing.assert_array_equal(trace(scene, 9000, seed=11, max_time=0.1).data, reference.data)


def test_direct_split_is_exact(shoebox_scene):
    scene = shoebox_scene(absorption=0.4, scattering=0.2)
    full = trace(scene, 6000, seed=5, max_time=0.2)
    reflected = trace(scene, 6000, seed=5, max_time=0.2, skip_direct=True)
    direct = trace(scene, 6000, seed=5, max_time=0.2, max_hit_order=0)
    np.testing.assert_array_equal(reflected.data + direct.data, full.data)
    assert np.any(direct.data) and np.any(reflected.data)


def test_skip_order(shoebox_scene):
    scene = shoebox_scene(absorption=0.4, scattering=0.2)
    skip_direct = trace(scene, 3000, seed=5, max_time=0.2, skip_direct=True)
    skip_zero = trace(scene, 3000, seed=5, max_time=0.2, skip_order_leq=0)
    np.testing.assert_array_equal(skip_direct.data, skip_zero.data)

    skip_two = trace(scene, 3000, seed=5, max_time=0.2, skip_order_leq=2)
    assert np.all(skip_two.data <= skip_direct.data + 1e-300)
    # nothing reaches the receiver before the shortest third-order path
    first = np.flatnonzero(skip_two.energy_decay())[0]
    assert first > np.flatnonzero(skip_direct.energy_decay())[0]


def test_energy_decreases_with_absorption(shoebox_scene):
    low = trace(shoebox_scene(absorption=0.2), 4000, seed=9, max_time=0.2)
    high = trace(shoebox_scene(absorption=0.5), 4000, seed=9, max_time=0.2)
    assert np.all(high.band_totals() <= low.band_totals())


def test_energy_decreases_with_air_absorption(shoebox_scene):
    dry = trace(shoebox_scene(), 4000, seed=9, max_time=0.2)
    damped = trace(shoebox_scene(air=0.02), 4000, seed=9, max_time=0.2)
    assert np.all(damped.band_totals() <= dry.band_totals())


def test_independent_runs_agree(shoebox_scene):
    scene = shoebox_scene(absorption=0.3, scattering=0.5)
    a = trace(scene, 40000, seed=1, max_time=0.2, skip_direct=True).band_totals().sum()
    b = trace(scene, 40000, seed=2, max_time=0.2, skip_direct=True).band_totals().sum()
    assert a == pytest.approx(b, rel=0.1)


def test_open_mesh(booth1):
    triangles = booth1.room.to_mesh().triangles[1:]
    scene = Scene(Mesh(triangles), booth1.materials, booth1.source, booth1.receiver)
    with pytest.raises(OpenMeshError) as error:
        trace(scene, 5000, seed=1, max_time=0.2)
    assert error.value.position is not None
    assert len(error.value.position) == 3


@pytest.mark.parametrize(
    "kwargs",
    [{"n_rays": 0}, {"max_time": 0.0}, {"receiver_radius": -1.0}, {"bin_width": 0.0}],
)
def test_trace_arguments(booth1, kwargs):
    arguments = {"n_rays": 10, "seed": 0, "max_time": 0.1}
    arguments.update(kwargs)
    with pytest.raises(SceneError):
        trace(booth1, **arguments)


def test_stage_trace(tmp_path):
    from auralab.scene import preset_scene

    histogram = trace(preset_scene("stage_small"), 1000, seed=4, max_time=0.2, skip_direct=True)
    assert np.any(histogram.data)
    path = tmp_path / "histogram.csv"
    histogram_to_csv(histogram, str(path))
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["band", "time_bin_s", "direction_bin", "energy"]
    assert len(rows) - 1 == np.count_nonzero(histogram.data)


def _exponential_histogram(t60, bin_width=0.001, duration=2.0):
    histogram = EnergyHistogram.zeros(int(round(duration / bin_width)), bin_width)
    times = np.arange(histogram.n_bins) * bin_width
    decay = 10.0 ** (-6.0 * times / t60)
    histogram.data[:, :, 0] = decay[None, :]
    return histogram


def test_decay_curve():
    curve = decay_curve(_exponential_histogram(0.5))
    assert curve[0] == 0.0
    assert np.all(np.diff(curve) <= 0.0)


@pytest.mark.parametrize("t60", [0.1, 0.5, 1.2])
def test_fit_t60(t60):
    assert fit_t60(_exponential_histogram(t60, duration=4.0 * t60)) == pytest.approx(t60, rel=1e-3)


def test_fit_t60_needs_decay():
    histogram = EnergyHistogram.zeros(100)
    with pytest.raises(SignalError):
        fit_t60(histogram)
    histogram.data[:, :, 0] = 1.0
    with pytest.raises(SignalError):
        fit_t60(histogram)


@pytest.mark.slow
def test_booth2_t60(booth2):
    histogram = trace(booth2, 100000, seed=20240601, max_time=0.2, skip_direct=True)
    measured = fit_t60(histogram)
    # with this much absorption Sabine overestimates the decay time by far
    assert 0.8 * eyring_rt(booth2, 4) <= measured <= 1.2 * sabine_rt(booth2, 4)


@pytest.mark.slow
@pytest.mark.parametrize("trial", range(5))
def test_random_shoebox_t60(random_shoebox, rng, trial):
    for _ in range(trial):
        rng.random()
    alpha = float(rng.uniform(0.1, 0.6))
    scene = random_shoebox(absorption=alpha, scattering=0.5)
    expected = eyring_rt(scene, 0)
    histogram = trace(scene, 20000, seed=trial, max_time=1.2 * expected, skip_direct=True)
    assert fit_t60(histogram) == pytest.approx(expected, rel=0.2)
