# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

"""
Specular early reflections of shoebox rooms by the image-source method.

Images are enumerated on the mirror lattice: along each axis the lattice index
``n`` places the image at ``n * L + s`` for even ``n`` and ``(n + 1) * L - s``
for odd ``n``, where ``L`` is the room size and ``s`` the source coordinate.
"""

import csv
import itertools
from dataclasses import dataclass

import numpy as np
import sgtk

from . import constants
from .errors import GeometryError
from .scene import SHOEBOX_WALLS, Shoebox
from .utils import normalize

logger = sgtk.LogManager.get_logger(__name__)


@dataclass(frozen=True)
class ImageSource:
    """
    A mirrored source.

    ``reflection_counts`` holds the number of reflections off each wall in the
    order of :data:`auralab.scene.SHOEBOX_WALLS` (x0, x1, y0, y1, z0, z1).
    """

    position: tuple
    reflection_counts: tuple
    lattice_index: tuple

    @property
    def order(self):
        return sum(self.reflection_counts)


@dataclass
class Arrival:
    """
    One deterministic sound path at the receiver.

    :ivar delay: Propagation time in seconds.
    :ivar amplitude: Per-band pressure factor, shape (bands,).
    :ivar direction: Unit vector from the receiver toward where the sound comes from.
    :ivar order: Number of wall reflections on the path.
    """

    delay: float
    amplitude: np.ndarray
    direction: np.ndarray
    order: int = 0


def _axis_image(index, size, coordinate):
    """Image coordinate and (low wall, high wall) hit counts for one lattice index."""

    if index % 2 == 0:
        position = index * size + coordinate
    else:
        position = (index + 1) * size - coordinate
    half, rest = divmod(abs(index), 2)
    if index >= 0:
        return position, (half, half + rest)
    return position, (half + rest, half)


@sgtk.LogManager.log_timing
def image_sources(room, source_pos, max_order):
    """
    Enumerate every image source of a shoebox up to a reflection order.

    :param room: The room. Only shoeboxes are supported.
    :type room: :class:`~auralab.scene.Shoebox`
    :param source_pos: Source position in meters.
    :param max_order: Highest total reflection order, >= 0.
    :type max_order: int

    :raises GeometryError: For non-shoebox rooms, negative orders or a source
        outside the box.
    :return: Images sorted by order, then lattice index. The true source comes first.
    :rtype: list[ImageSource]
    """

    if not isinstance(room, Shoebox):
        raise GeometryError(
            "Image sources are only available for shoebox rooms, got %s"
            % type(room).__name__
        )
    if max_order < 0:
        raise GeometryError("max_order must be >= 0, got %d" % max_order)

    source = np.asarray(source_pos, dtype=float)
    dims = room.dimensions
    if not (np.all(source > 0.0) and np.all(source < dims)):
        raise GeometryError("Source %s is outside the shoebox" % (tuple(source),))

    images = []
    span = range(-max_order, max_order + 1)
    for lattice in itertools.product(span, span, span):
        if sum(abs(n) for n in lattice) > max_order:
            continue
        position = []
        counts = []
        for axis, n in enumerate(lattice):
            p, hits = _axis_image(n, dims[axis], source[axis])
            position.append(float(p))
            counts.extend(hits)
        images.append(ImageSource(tuple(position), tuple(counts), lattice))

    images.sort(key=lambda image: (image.order, image.lattice_index))
    logger.debug("%d image sources up to order %d" % (len(images), max_order))
    return images


def ism_arrivals(scene, max_order=constants.DEFAULT_ISM_ORDER, skip_direct=False):
    """
    Turn the image sources of a shoebox scene into arrivals at the receiver.

    Each arrival has ``delay = d / c`` and per-band amplitude
    ``(1 / d) * prod(sqrt(1 - alpha)) * directivity gain * air attenuation``, the
    product running over every wall hit. The directivity is evaluated toward the
    first leg of the path.

    :param scene: A shoebox scene.
    :type scene: :class:`~auralab.scene.Scene`
    :param max_order: Highest reflection order.
    :param skip_direct: Omit the order-0 arrival.

    :raises GeometryError: As :func:`image_sources`, or for an image coinciding with
        the receiver.
    :return: Arrivals sorted by delay, ties by order.
    :rtype: list[Arrival]
    """

    room = scene.room
    images = image_sources(room, scene.source.position, max_order)
    receiver = np.asarray(scene.receiver.position, dtype=float)

    # amplitude factor of one reflection off each wall, shape (6, bands)
    wall_factor = np.array(
        [
            np.sqrt(1.0 - np.asarray(scene.materials[room.wall_material(wall)].absorption))
            for wall in SHOEBOX_WALLS
        ]
    )
    air = np.asarray(scene.air_absorption, dtype=float)

    arrivals = []
    for image in images:
        if skip_direct and image.order == 0:
            continue
        offset = receiver - np.asarray(image.position)
        distance = float(np.linalg.norm(offset))
        if distance < 1e-6:
            raise GeometryError("Image source at %s coincides with the receiver" % (image.position,))

        # the first leg leaves the true source mirrored once per odd axis index
        emission = offset / distance
        flips = np.array([-1.0 if n % 2 else 1.0 for n in image.lattice_index])
        gain = scene.source.gain(emission * flips)[0]

        amplitude = gain / distance
        for wall, count in enumerate(image.reflection_counts):
            if count:
                amplitude = amplitude * wall_factor[wall] ** count
        amplitude = amplitude * 10.0 ** (-air * distance / 20.0)

        arrivals.append(
            Arrival(
                delay=distance / scene.speed_of_sound,
                amplitude=amplitude,
                direction=normalize(-offset),
                order=image.order,
            )
        )

    arrivals.sort(key=lambda arrival: (arrival.delay, arrival.order))
    return arrivals


def arrivals_to_csv(arrivals, path):
    """
    Write arrivals with header ``delay_s, order, dir_x, dir_y, dir_z`` followed by
    one amplitude column per band.
    """

    header = ["delay_s", "order", "dir_x", "dir_y", "dir_z"] + [
        "amp_%gHz" % f for f in constants.BAND_CENTERS_HZ
    ]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for arrival in arrivals:
            writer.writerow(
                [repr(float(arrival.delay)), arrival.order]
                + [repr(float(v)) for v in arrival.direction]
                + [repr(float(v)) for v in arrival.amplitude]
            )
    logger.info("Wrote %d arrivals to %s" % (len(arrivals), path))
