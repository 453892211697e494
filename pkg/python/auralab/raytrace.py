# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

"""
Stochastic energy ray tracing.

Rays leave the source uniformly over the sphere carrying per-band energy
``4 * pi / n_rays`` weighted by the squared directivity gain, so that the energy
recorded by the spherical receiver matches the squared free-field pressure
``1 / d**2`` of a unit source. Hits are weighted by ``1 / (pi * r**2)`` and
binned by path delay and incidence direction.

Rays are processed in fixed-size batches whose random streams are keyed by
``(seed, batch index)``; batches run on a thread pool and are merged in batch
order, so the result never depends on the worker count.
"""

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import sgtk

from . import constants
from .errors import OpenMeshError, SceneError, SignalError
from .scene import intersect_triangles
from .utils import direction_bin_centers, direction_bin_index, normalize, worker_count

logger = sgtk.LogManager.get_logger(__name__)


@dataclass
class EnergyHistogram:
    """
    Ray-traced energy at the receiver.

    :ivar data: Energy per (band, time bin, direction bin), all >= 0.
    :ivar bin_width: Time bin width in seconds.
    :ivar rays_emitted: Number of rays traced.
    :ivar seed: Seed of the random streams.
    """

    data: np.ndarray
    bin_width: float = constants.DEFAULT_BIN_WIDTH
    rays_emitted: int = 0
    seed: int = 0

    @classmethod
    def zeros(cls, n_bins, bin_width=constants.DEFAULT_BIN_WIDTH):
        centers = direction_bin_centers()
        return cls(
            np.zeros((constants.NUM_BANDS, n_bins, len(centers))), bin_width=bin_width
        )

    @property
    def bands(self):
        return self.data.shape[0]

    @property
    def n_bins(self):
        return self.data.shape[1]

    def band_totals(self):
        """Total energy per band."""
        return self.data.sum(axis=(1, 2))

    def energy_decay(self, band=None):
        """Energy per time bin, summed over directions and over bands unless one is given."""
        if band is None:
            return self.data.sum(axis=(0, 2))
        return self.data[band].sum(axis=1)


def reflect(incoming, normal, scattering, draws):
    """
    Reflect directions off a surface.

    The first draw decides the reflection kind: below ``scattering`` the ray is
    scattered to a cosine-law direction about the normal built from the second
    and third draws, otherwise it is mirrored.

    :param incoming: Unit incident directions, shape (..., 3), pointing against the normal.
    :param normal: Unit surface normals, shape (..., 3).
    :param scattering: Scattering coefficient(s) in [0, 1].
    :param draws: Uniform [0, 1) draws, shape (..., 3).

    :return: Outgoing unit directions in the half-space of the normal.
    :rtype: numpy.ndarray
    """

    incoming = np.asarray(incoming, dtype=float)
    normal = np.asarray(normal, dtype=float)
    draws = np.asarray(draws, dtype=float)
    scattering = np.asarray(scattering, dtype=float)

    cos_in = np.sum(incoming * normal, axis=-1, keepdims=True)
    specular = incoming - 2.0 * cos_in * normal

    # cosine-weighted hemisphere sample around the normal
    tangent, bitangent = orthonormal_basis(normal)
    sin_theta = np.sqrt(draws[..., 1])[..., None]
    cos_theta = np.sqrt(1.0 - draws[..., 1])[..., None]
    phi = (2.0 * np.pi * draws[..., 2])[..., None]
    diffuse = (
        sin_theta * np.cos(phi) * tangent
        + sin_theta * np.sin(phi) * bitangent
        + cos_theta * normal
    )

    scattered = (draws[..., 0] < scattering)[..., None]
    return normalize(np.where(scattered, diffuse, specular))


def orthonormal_basis(normal):
    """Two unit vectors completing ``normal`` to a right-handed orthonormal frame."""

    normal = np.asarray(normal, dtype=float)
    helper = np.where(
        (np.abs(normal[..., 0]) < 0.9)[..., None],
        np.array([1.0, 0.0, 0.0]),
        np.array([0.0, 1.0, 0.0]),
    )
    tangent = normalize(np.cross(normal, helper))
    bitangent = np.cross(normal, tangent)
    return tangent, bitangent


def _uniform_sphere(rng, count):
    z = 1.0 - 2.0 * rng.random(count)
    phi = 2.0 * np.pi * rng.random(count)
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


class _Tracer(object):
    """Per-run geometry and parameters shared by every batch."""

    def __init__(
        self,
        scene,
        n_rays,
        seed,
        max_time,
        min_order,
        max_order,
        receiver_radius,
        bin_width,
    ):
        mesh = scene.mesh()
        self.v0, self.e1, self.e2, self.normals, material_ids = mesh.arrays()
        absorption, scattering = scene.material_arrays(material_ids)
        self.reflectance = 1.0 - absorption
        # one scattering decision per hit; the band mean drives the direction
        self.scattering = scattering.mean(axis=1)
        self.air = np.asarray(scene.air_absorption, dtype=float)

        self.source = scene.source
        self.origin = np.asarray(scene.source.position, dtype=float)
        self.receiver = np.asarray(scene.receiver.position, dtype=float)
        self.radius = receiver_radius
        self.c = scene.speed_of_sound

        self.n_rays = n_rays
        self.seed = seed
        self.max_time = max_time
        self.max_length = max_time * self.c
        self.min_order = min_order
        self.max_order = max_order
        self.bin_width = bin_width
        self.n_bins = int(math.ceil(max_time / bin_width - 1e-9))
        self.centers = direction_bin_centers()
        self.ray_energy = 4.0 * np.pi / n_rays
        self.threshold = constants.ENERGY_FLOOR * self.ray_energy

    def _record(self, accumulator, position, direction, energy, length, order, segment):
        """Deposit receiver hits of the segments ``position + t * direction``, t in [0, segment]."""

        to_center = self.receiver - position
        b = np.einsum("ij,ij->i", to_center, direction)
        disc = b * b - (np.einsum("ij,ij->i", to_center, to_center) - self.radius**2)
        root = np.sqrt(np.maximum(disc, 0.0))
        enter = b - root
        leave = b + root
        hit = (disc > 0.0) & (leave > 0.0) & (enter < segment)
        hit &= (order >= self.min_order) & (order <= self.max_order)
        if not np.any(hit):
            return

        t = np.maximum(enter[hit], 0.0)
        path = length[hit] + t
        time_bin = np.floor(path / self.c / self.bin_width).astype(int)
        inside = (time_bin < self.n_bins) & (path < self.max_length)
        if not np.any(inside):
            return

        deposit = energy[hit] * 10.0 ** (-self.air[None, :] * t[:, None] / 10.0)
        deposit = deposit / (np.pi * self.radius**2)
        direction_bin = direction_bin_index(-direction[hit], self.centers)
        for band in range(constants.NUM_BANDS):
            np.add.at(
                accumulator[band],
                (time_bin[inside], direction_bin[inside]),
                deposit[inside, band],
            )

    def run_batch(self, batch):
        """Trace one batch. Returns (order-0 histogram data, reflected histogram data)."""

        start = batch * constants.RAY_BATCH_SIZE
        count = min(constants.RAY_BATCH_SIZE, self.n_rays - start)
        rng = np.random.default_rng([self.seed, batch])

        shape = (constants.NUM_BANDS, self.n_bins, len(self.centers))
        direct = np.zeros(shape)
        reflected = np.zeros(shape)

        direction = _uniform_sphere(rng, count)
        position = np.repeat(self.origin[None, :], count, axis=0)
        energy = self.ray_energy * self.source.gain(direction) ** 2
        length = np.zeros(count)
        order = np.zeros(count, dtype=int)
        alive = np.max(energy, axis=1) > self.threshold

        while np.any(alive):
            index = np.flatnonzero(alive)
            p, d = position[index], direction[index]
            distance, triangle = intersect_triangles(p, d, self.v0, self.e1, self.e2)

            escaped = triangle < 0
            if np.any(escaped):
                first = index[np.flatnonzero(escaped)[0]]
                raise OpenMeshError(
                    "Ray escaped the room from %s travelling %s"
                    % (tuple(np.round(position[first], 6)), tuple(np.round(direction[first], 6))),
                    position=tuple(position[first]),
                )

            segment = np.minimum(distance, self.max_length - length[index])
            for target, wanted in ((direct, 0), (reflected, None)):
                selector = order[index] == 0 if wanted == 0 else order[index] > 0
                if np.any(selector):
                    self._record(
                        target,
                        p[selector],
                        d[selector],
                        energy[index][selector],
                        length[index][selector],
                        order[index][selector],
                        segment[selector],
                    )

            # move to the wall, absorb and reflect
            hit_point = p + distance[:, None] * d
            attenuation = 10.0 ** (-self.air[None, :] * distance[:, None] / 10.0)
            new_energy = energy[index] * attenuation * self.reflectance[triangle]
            normal = self.normals[triangle]
            draws = rng.random((len(index), 3))
            new_direction = reflect(d, normal, self.scattering[triangle], draws)

            position[index] = hit_point + constants.SURFACE_OFFSET * normal
            direction[index] = new_direction
            energy[index] = new_energy
            length[index] += distance
            order[index] += 1

            alive[index] = (
                (np.max(new_energy, axis=1) > self.threshold)
                & (length[index] < self.max_length)
                & (order[index] <= self.max_order)
            )

        return direct, reflected


@sgtk.LogManager.log_timing
def trace(
    scene,
    n_rays,
    seed,
    max_time=constants.DEFAULT_MAX_TIME,
    skip_direct=False,
    skip_order_leq=-1,
    max_hit_order=None,
    receiver_radius=constants.DEFAULT_RECEIVER_RADIUS,
    bin_width=constants.DEFAULT_BIN_WIDTH,
):
    """
    Trace rays from the source and record the energy reaching the receiver.

    :param scene: The scene. Shoeboxes are triangulated.
    :type scene: :class:`~auralab.scene.Scene`
    :param n_rays: Number of rays, >= 1.
    :param seed: Seed of the per-batch random streams.
    :param max_time: Histogram length in seconds; rays are stopped beyond it.
    :param skip_direct: Discard receiver hits of rays that were not reflected yet.
    :param skip_order_leq: Discard hits with this many reflections or fewer.
    :param max_hit_order: Discard hits with more reflections than this. Rays stop
        once they exceed it.
    :param receiver_radius: Radius of the receiver sphere in meters.
    :param bin_width: Time bin width in seconds.

    :raises SceneError: For non-positive ray counts, times or radii.
    :raises OpenMeshError: When a ray leaves the room through a gap.
    :rtype: EnergyHistogram
    """

    if n_rays < 1:
        raise SceneError("n_rays must be >= 1, got %d" % n_rays)
    if not max_time > 0.0 or not bin_width > 0.0 or not receiver_radius > 0.0:
        raise SceneError("max_time, bin_width and receiver_radius must be positive")

    min_order = max(1 if skip_direct else 0, skip_order_leq + 1)
    max_order = np.iinfo(np.int64).max if max_hit_order is None else max_hit_order
    tracer = _Tracer(
        scene, n_rays, seed, max_time, min_order, max_order, receiver_radius, bin_width
    )

    n_batches = int(math.ceil(n_rays / constants.RAY_BATCH_SIZE))
    workers = min(worker_count(), n_batches)
    logger.debug(
        "Tracing %d rays in %d batches on %d workers (scene '%s')"
        % (n_rays, n_batches, workers, scene.name)
    )
    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(tracer.run_batch, range(n_batches)))

    direct = np.zeros_like(results[0][0])
    reflected = np.zeros_like(results[0][1])
    for batch_direct, batch_reflected in results:
        direct += batch_direct
        reflected += batch_reflected

    return EnergyHistogram(
        data=direct + reflected, bin_width=bin_width, rays_emitted=n_rays, seed=seed
    )


def decay_curve(histogram, band=None):
    """
    Backward-integrated energy decay curve in dB, 0 dB at the first bin.

    :param histogram: The histogram.
    :type histogram: EnergyHistogram
    :param band: Band index, or None for the broadband curve.

    :raises SignalError: For a histogram without energy.
    :return: Decay in dB per time bin; bins after the last energy are ``-inf``.
    :rtype: numpy.ndarray
    """

    energy = histogram.energy_decay(band)
    integrated = np.cumsum(energy[::-1])[::-1]
    if integrated[0] <= 0.0:
        raise SignalError("Histogram holds no energy")
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(integrated / integrated[0])


def fit_t60(histogram, band=None, upper_db=-5.0, lower_db=-35.0):
    """
    Reverberation time from a linear fit of the decay curve between ``upper_db``
    and ``lower_db``, extrapolated to 60 dB of decay.

    :raises SignalError: When the curve does not decay across the fit range.
    :return: T60 in seconds.
    :rtype: float
    """

    curve = decay_curve(histogram, band)
    times = (np.arange(len(curve)) + 0.5) * histogram.bin_width
    selected = (curve <= upper_db) & (curve >= lower_db)
    if np.count_nonzero(selected) < 2 or np.min(curve[np.isfinite(curve)]) > lower_db:
        raise SignalError(
            "Decay curve does not span %g to %g dB" % (upper_db, lower_db)
        )
    slope, _ = np.polyfit(times[selected], curve[selected], 1)
    if slope >= 0.0:
        raise SignalError("Decay curve is not decaying")
    return -60.0 / slope


def histogram_to_csv(histogram, path):
    """Write non-zero bins with header ``band, time_bin_s, direction_bin, energy``."""

    bands, bins, directions = np.nonzero(histogram.data)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["band", "time_bin_s", "direction_bin", "energy"])
        for band, time_bin, direction in zip(bands, bins, directions):
            writer.writerow(
                [
                    int(band),
                    repr(float(time_bin * histogram.bin_width)),
                    int(direction),
                    repr(float(histogram.data[band, time_bin, direction])),
                ]
            )
    logger.info("Wrote %d histogram bins to %s" % (len(bands), path))
