# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

import itertools
import os

import numpy as np

from . import constants


def normalize(vectors):
    """
    Scale vectors to unit length along the last axis.

    :param vectors: A single vector or an array of vectors.
    :type vectors: array-like

    :return: The unit vectors. Zero vectors are returned unchanged.
    :rtype: numpy.ndarray
    """

    vectors = np.asarray(vectors, dtype=float)
    norm = np.linalg.norm(vectors, axis=-1, keepdims=True)
    return np.divide(vectors, norm, out=np.zeros_like(vectors), where=norm > 0.0)


def sph2cart(azimuth, elevation):
    """
    Unit vectors for azimuth (counter-clockwise from +x) and elevation (up from
    the horizontal plane), both in radians.
    """

    azimuth = np.asarray(azimuth, dtype=float)
    elevation = np.asarray(elevation, dtype=float)
    x = np.cos(azimuth) * np.cos(elevation)
    y = np.sin(azimuth) * np.cos(elevation)
    z = np.sin(elevation)
    return np.stack([x, y, z], -1)


def direction_bin_centers():
    """
    The 26-direction partition of the sphere: 6 axis, 12 edge and 8 corner
    directions of the unit cube, as unit vectors.

    :rtype: numpy.ndarray
    """

    centers = [
        c for c in itertools.product((-1.0, 0.0, 1.0), repeat=3) if any(c)
    ]
    # axis directions first, then edges, then corners
    centers.sort(key=lambda c: sum(abs(v) for v in c))
    return normalize(np.array(centers))


def direction_bin_index(directions, centers=None):
    """
    Index of the nearest direction bin for each direction. Ties go to the lowest
    index.
    """

    if centers is None:
        centers = direction_bin_centers()
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    return np.argmax(directions @ centers.T, axis=-1)


def worker_count():
    """
    Number of worker threads allowed for parallel stages, capped by the
    AURALAB_THREADS environment variable.
    """

    available = os.cpu_count() or 1
    value = os.environ.get(constants.THREADS_ENV_VAR)
    if not value:
        return available
    try:
        return max(1, min(available, int(value)))
    except ValueError:
        return available
