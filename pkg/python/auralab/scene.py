# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

"""
Geometric and material description of laboratory rooms and virtual stages,
with source and receiver configuration.

Rooms are either axis-aligned shoeboxes or closed triangle meshes whose
triangle winding makes every normal point into the air volume. Scenes are
immutable values and can be written to and read from a line-oriented text
format (see :func:`emit_scene` and :func:`parse_scene`).
"""

import itertools
import math
import os
from dataclasses import dataclass, field

import numpy as np
import sgtk

from . import constants
from .errors import ReverberationUndefinedError, SceneError
from .utils import normalize, sph2cart

logger = sgtk.LogManager.get_logger(__name__)

# Wall order of a shoebox: low/high x (width), low/high y (length), low/high z (height)
SHOEBOX_WALLS = ("x0", "x1", "y0", "y1", "z0", "z1")

_ORIENTATION_TOLERANCE = 1e-6
_COINCIDENCE_DISTANCE = 1e-6
# cyclic axis pairs: cross(e_b, e_c) == e_a
_FACE_AXES = {0: (1, 2), 1: (2, 0), 2: (0, 1)}


def _bands(values):
    values = tuple(float(v) for v in values)
    if len(values) == 1:
        values = values * constants.NUM_BANDS
    return values


# ----------------------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class Material:
    """Per-band absorption and scattering coefficients of a surface."""

    absorption: tuple
    scattering: tuple

    @classmethod
    def uniform(cls, absorption, scattering=0.0):
        """
        Create a material with identical coefficients in every band, which is how
        a constant mean absorption coefficient is expanded to the band set.
        """

        return cls(
            absorption=(float(absorption),) * constants.NUM_BANDS,
            scattering=(float(scattering),) * constants.NUM_BANDS,
        )


@dataclass(frozen=True)
class Shoebox:
    """
    Axis-aligned box room with one corner at the origin. ``width`` runs along x,
    ``length`` along y and ``height`` along z.
    """

    width: float
    length: float
    height: float
    wall_materials: tuple = ("default",) * 6

    @property
    def dimensions(self):
        return np.array([self.width, self.length, self.height], dtype=float)

    def wall_material(self, wall):
        """Material id of a wall named in :data:`SHOEBOX_WALLS`."""
        return self.wall_materials[SHOEBOX_WALLS.index(wall)]

    def to_mesh(self):
        """
        Triangulate the box into a closed mesh whose normals point into the room.

        :rtype: Mesh
        """

        def material_for(axis, high, center):
            return self.wall_materials[2 * axis + int(high)]

        return _box_union_mesh(
            [((0.0, 0.0, 0.0), (self.width, self.length, self.height))],
            material_for,
        )


@dataclass(frozen=True)
class Triangle:
    """A mesh face. The winding order defines the normal, which points into the air."""

    vertices: tuple
    material: str

    @property
    def normal(self):
        v0, v1, v2 = (np.asarray(v, dtype=float) for v in self.vertices)
        return normalize(np.cross(v1 - v0, v2 - v0))

    @property
    def area(self):
        v0, v1, v2 = (np.asarray(v, dtype=float) for v in self.vertices)
        return 0.5 * float(np.linalg.norm(np.cross(v1 - v0, v2 - v0)))


@dataclass(frozen=True)
class Mesh:
    """Closed triangle mesh room."""

    triangles: tuple

    def arrays(self):
        """
        Return the vertex arrays used by the intersection routines.

        :return: (v0, e1, e2, normals, material ids) where ``e1 = v1 - v0`` and
            ``e2 = v2 - v0``.
        :rtype: tuple
        """

        verts = np.array([t.vertices for t in self.triangles], dtype=float)
        v0 = verts[:, 0]
        e1 = verts[:, 1] - v0
        e2 = verts[:, 2] - v0
        normals = normalize(np.cross(e1, e2))
        materials = [t.material for t in self.triangles]
        return v0, e1, e2, normals, materials

    def contains(self, point):
        """
        Test whether a point lies inside the closed mesh by ray parity.

        :param point: The point to test.
        :type point: array-like

        :rtype: bool
        """

        v0, e1, e2, _, _ = self.arrays()
        direction = normalize(np.array([0.5773, 0.5779, 0.5767]))
        origin = np.asarray(point, dtype=float)[None, :]
        t, _ = intersect_triangles(
            origin, direction[None, :], v0, e1, e2, front_only=False, first=False
        )
        return bool(np.count_nonzero(np.isfinite(t[0])) % 2 == 1)


@dataclass(frozen=True)
class Directivity:
    """
    Sampled source gain over (azimuth, elevation, band). Angles are in degrees,
    azimuth counter-clockwise from +x and elevation up from the horizontal plane.
    """

    azimuths: tuple
    elevations: tuple
    gains: tuple
    path: str = field(default=None, compare=False)

    def grid_directions(self):
        az, el = np.meshgrid(
            np.radians(self.azimuths), np.radians(self.elevations), indexing="ij"
        )
        return sph2cart(az, el).reshape(-1, 3)

    def gain(self, directions):
        """
        Per-band gains toward the given directions, taken from the nearest grid
        point by angular distance.

        :param directions: Unit vectors, shape (n, 3) or (3,).
        :return: Gains, shape (n, bands).
        :rtype: numpy.ndarray
        """

        directions = np.atleast_2d(normalize(directions))
        grid = self.grid_directions()
        nearest = np.argmax(directions @ grid.T, axis=-1)
        table = np.asarray(self.gains, dtype=float).reshape(-1, constants.NUM_BANDS)
        return table[nearest]


@dataclass(frozen=True)
class SourceSpec:
    """Sound source position with optional directivity (omnidirectional when None)."""

    position: tuple
    directivity: Directivity = None

    def gain(self, directions):
        """Per-band directivity gain toward ``directions``, shape (n, bands)."""

        directions = np.atleast_2d(np.asarray(directions, dtype=float))
        if self.directivity is None:
            return np.ones((directions.shape[0], constants.NUM_BANDS))
        return self.directivity.gain(directions)


@dataclass(frozen=True)
class ReceiverSpec:
    """
    Listener position and head orientation. ``hrtf`` is either ``"parametric"``
    (spherical head of radius ``head_radius``) or the path of an HRTF grid file.
    """

    position: tuple
    look: tuple = (1.0, 0.0, 0.0)
    up: tuple = (0.0, 0.0, 1.0)
    hrtf: str = "parametric"
    head_radius: float = constants.DEFAULT_HEAD_RADIUS


@dataclass(frozen=True)
class Scene:
    """A room with its materials, one source and one receiver."""

    room: object
    materials: dict
    source: SourceSpec
    receiver: ReceiverSpec
    speed_of_sound: float = constants.DEFAULT_SPEED_OF_SOUND
    air_absorption: tuple = (0.0,) * constants.NUM_BANDS
    name: str = ""

    @property
    def is_shoebox(self):
        return isinstance(self.room, Shoebox)

    def mesh(self):
        """The room as a triangle mesh, triangulating shoeboxes on demand."""

        if isinstance(self.room, Shoebox):
            return self.room.to_mesh()
        return self.room

    def material_arrays(self, material_ids):
        """
        Absorption and scattering arrays, shape (len(material_ids), bands), in the
        order of the given ids.
        """

        absorption = np.array([self.materials[m].absorption for m in material_ids])
        scattering = np.array([self.materials[m].scattering for m in material_ids])
        return absorption, scattering


@dataclass
class Violation:
    """A single violated scene invariant."""

    location: str
    message: str

    def __str__(self):
        return "%s: %s" % (self.location, self.message)


@dataclass
class ValidationReport:
    """Result of :func:`validate_scene`. An empty report means the scene is valid."""

    violations: list = field(default_factory=list)

    @property
    def is_valid(self):
        return not self.violations

    def add(self, location, message):
        self.violations.append(Violation(location, message))

    def messages(self):
        return [v.message for v in self.violations]

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)


# ----------------------------------------------------------------------------------------
# Geometry


def intersect_triangles(origins, directions, v0, e1, e2, front_only=True, first=True):
    """
    Vectorized Moller-Trumbore ray/triangle intersection.

    :param origins: Ray origins, shape (n, 3).
    :param directions: Unit ray directions, shape (n, 3).
    :param v0: First vertex of every triangle, shape (m, 3).
    :param e1: Edge ``v1 - v0`` of every triangle, shape (m, 3).
    :param e2: Edge ``v2 - v0`` of every triangle, shape (m, 3).
    :param front_only: Only accept faces whose normal opposes the ray. Rays inside
        the room always meet faces from the front, which also rejects the face a
        ray has just left.
    :param first: Reduce to the nearest hit per ray.

    :return: If ``first``, (distance, triangle index) per ray with ``inf`` and -1
        for misses; otherwise the (n, m) distance matrix with ``inf`` for misses
        and None.
    :rtype: tuple
    """

    eps = 1e-12
    tol = 1e-9
    d = directions[:, None, :]
    pvec = np.cross(d, e2[None, :, :])
    det = np.einsum("mk,nmk->nm", e1, pvec)
    if front_only:
        normals = np.cross(e1, e2)
        facing = np.einsum("nk,mk->nm", directions, normals) < 0.0
    else:
        facing = np.ones(det.shape, dtype=bool)
    ok = np.abs(det) > eps
    inv = np.divide(1.0, det, out=np.zeros_like(det), where=ok)
    tvec = origins[:, None, :] - v0[None, :, :]
    u = np.einsum("nmk,nmk->nm", tvec, pvec) * inv
    qvec = np.cross(tvec, e1[None, :, :])
    v = np.einsum("nk,nmk->nm", directions, qvec) * inv
    t = np.einsum("mk,nmk->nm", e2, qvec) * inv
    hit = ok & facing & (u >= -tol) & (v >= -tol) & (u + v <= 1.0 + tol) & (t > 1e-9)
    t = np.where(hit, t, np.inf)
    if not first:
        return t, None
    index = np.argmin(t, axis=1)
    distance = t[np.arange(t.shape[0]), index]
    index = np.where(np.isfinite(distance), index, -1)
    return distance, index


def _box_union_mesh(boxes, material_for):
    """
    Triangulate the union of axis-aligned boxes on the grid of all their bounds,
    so neighbouring faces always share complete edges and the mesh is watertight.

    :param boxes: List of (min corner, max corner) pairs.
    :param material_for: Callable (axis, high, face center) -> material id. ``high``
        is True for faces whose inward normal points along -axis.

    :rtype: Mesh
    """

    grids = [
        sorted({float(b[0][a]) for b in boxes} | {float(b[1][a]) for b in boxes})
        for a in range(3)
    ]
    shape = tuple(len(g) - 1 for g in grids)

    def cell_inside(index):
        if any(i < 0 or i >= n for i, n in zip(index, shape)):
            return False
        center = [0.5 * (grids[a][index[a]] + grids[a][index[a] + 1]) for a in range(3)]
        return any(
            all(lo[a] < center[a] < hi[a] for a in range(3)) for lo, hi in boxes
        )

    triangles = []
    for index in itertools.product(*(range(n) for n in shape)):
        if not cell_inside(index):
            continue
        for axis in range(3):
            b, c = _FACE_AXES[axis]
            for high in (False, True):
                neighbour = list(index)
                neighbour[axis] += 1 if high else -1
                if cell_inside(neighbour):
                    continue
                plane = grids[axis][index[axis] + int(high)]
                b0, b1 = grids[b][index[b]], grids[b][index[b] + 1]
                c0, c1 = grids[c][index[c]], grids[c][index[c] + 1]

                def point(pb, pc):
                    p = [0.0, 0.0, 0.0]
                    p[axis], p[b], p[c] = plane, pb, pc
                    return tuple(p)

                A, B, C, D = point(b0, c0), point(b1, c0), point(b1, c1), point(b0, c1)
                center = [0.0, 0.0, 0.0]
                center[axis], center[b], center[c] = plane, 0.5 * (b0 + b1), 0.5 * (c0 + c1)
                material = material_for(axis, high, tuple(center))
                if high:
                    triangles.append(Triangle((A, C, B), material))
                    triangles.append(Triangle((A, D, C), material))
                else:
                    triangles.append(Triangle((A, B, C), material))
                    triangles.append(Triangle((A, C, D), material))
    return Mesh(tuple(triangles))


def volume(scene):
    """Air volume of the scene's room in cubic meters."""

    room = scene.room
    if isinstance(room, Shoebox):
        return room.width * room.length * room.height
    v0, e1, e2, _, _ = room.arrays()
    v1 = v0 + e1
    v2 = v0 + e2
    return abs(float(np.einsum("ij,ij->", v0, np.cross(v1, v2)))) / 6.0


def surface_areas(scene):
    """
    Surface area per material id in square meters.

    :rtype: dict
    """

    room = scene.room
    areas = {}
    if isinstance(room, Shoebox):
        w, l, h = room.width, room.length, room.height
        per_wall = (l * h, l * h, w * h, w * h, w * l, w * l)
        for material, area in zip(room.wall_materials, per_wall):
            areas[material] = areas.get(material, 0.0) + area
        return areas
    for triangle in room.triangles:
        areas[triangle.material] = areas.get(triangle.material, 0.0) + triangle.area
    return areas


def _absorption_area(scene, band):
    return sum(
        area * scene.materials[m].absorption[band]
        for m, area in surface_areas(scene).items()
    )


def sabine_rt(scene, band):
    """
    Sabine reverberation time ``0.161 V / sum(S_i alpha_i)`` of one band.

    :param scene: The scene.
    :param band: Band index into :data:`constants.BAND_CENTERS_HZ`.

    :raises ReverberationUndefinedError: When no surface absorbs in this band.
    :return: Reverberation time in seconds.
    :rtype: float
    """

    absorption = _absorption_area(scene, band)
    if absorption <= 0.0:
        raise ReverberationUndefinedError(
            "Room '%s' has no absorption in band %d" % (scene.name, band)
        )
    return 0.161 * volume(scene) / absorption


def eyring_rt(scene, band):
    """
    Eyring reverberation time ``0.161 V / (-S ln(1 - mean alpha))`` of one band.
    Fully absorbing rooms return 0.
    """

    areas = surface_areas(scene)
    total = sum(areas.values())
    absorption = _absorption_area(scene, band)
    if absorption <= 0.0:
        raise ReverberationUndefinedError(
            "Room '%s' has no absorption in band %d" % (scene.name, band)
        )
    mean_alpha = absorption / total
    if mean_alpha >= 1.0:
        return 0.0
    return 0.161 * volume(scene) / (-total * math.log(1.0 - mean_alpha))


def contains(scene, point):
    """Whether ``point`` lies strictly inside the room's air volume."""

    point = np.asarray(point, dtype=float)
    room = scene.room
    if isinstance(room, Shoebox):
        return bool(np.all(point > 0.0) and np.all(point < room.dimensions))
    return room.contains(point)


# ----------------------------------------------------------------------------------------
# Validation


def _check_bands(report, location, name, values, low=0.0, high=1.0):
    if len(values) != constants.NUM_BANDS:
        report.add(
            location,
            "%s has %d bands, expected %d" % (name, len(values), constants.NUM_BANDS),
        )
    for value in values:
        if not math.isfinite(value) or value < low or (high is not None and value > high):
            report.add(location, "%s coefficient %r outside [%s, %s]" % (name, value, low, high))
            break


def _check_mesh(report, mesh, materials):
    if not mesh.triangles:
        report.add("room", "mesh has no triangles")
        return

    directed = {}
    undirected = {}
    for index, triangle in enumerate(mesh.triangles):
        if triangle.material not in materials:
            report.add(
                "triangle %d" % index,
                "unknown material id '%s'" % triangle.material,
            )
        if triangle.area <= 0.0:
            report.add("triangle %d" % index, "degenerate triangle")
        v = triangle.vertices
        for a, b in ((v[0], v[1]), (v[1], v[2]), (v[2], v[0])):
            directed[(a, b)] = directed.get((a, b), 0) + 1
            key = (a, b) if a <= b else (b, a)
            undirected[key] = undirected.get(key, 0) + 1

    open_edges = [edge for edge, count in undirected.items() if count != 2]
    if open_edges:
        report.add("edge %s-%s" % open_edges[0], "mesh not watertight")
        return

    flipped = [edge for edge, count in directed.items() if count != 1]
    if flipped:
        report.add("edge %s-%s" % flipped[0], "inconsistent triangle winding")
        return

    # inward winding gives a negative signed volume
    v0, e1, e2, _, _ = mesh.arrays()
    signed = float(np.einsum("ij,ij->", v0, np.cross(v0 + e1, v0 + e2))) / 6.0
    if signed >= 0.0:
        report.add("room", "normals do not point into the air volume")


def validate_scene(scene):
    """
    Check every scene invariant.

    :param scene: The scene to validate.
    :type scene: Scene

    :return: The violations found; an empty report for valid scenes.
    :rtype: ValidationReport
    """

    report = ValidationReport()

    for material_id, material in scene.materials.items():
        location = "material '%s'" % material_id
        _check_bands(report, location, "absorption", material.absorption)
        _check_bands(report, location, "scattering", material.scattering)

    geometry_ok = True
    room = scene.room
    if isinstance(room, Shoebox):
        for name, value in zip(("width", "length", "height"), (room.width, room.length, room.height)):
            if not (math.isfinite(value) and value > 0.0):
                report.add("room", "shoebox %s must be positive, got %r" % (name, value))
                geometry_ok = False
        if len(room.wall_materials) != 6:
            report.add("room", "shoebox needs 6 wall materials")
        for wall, material_id in zip(SHOEBOX_WALLS, room.wall_materials):
            if material_id not in scene.materials:
                report.add("wall %s" % wall, "unknown material id '%s'" % material_id)
    elif isinstance(room, Mesh):
        before = len(report)
        _check_mesh(report, room, scene.materials)
        geometry_ok = len(report) == before
    else:
        report.add("room", "unsupported geometry %r" % type(room).__name__)
        geometry_ok = False

    source = np.asarray(scene.source.position, dtype=float)
    receiver = np.asarray(scene.receiver.position, dtype=float)
    if geometry_ok:
        if not contains(scene, source):
            report.add("source", "source outside the air volume")
        if not contains(scene, receiver):
            report.add("receiver", "receiver outside the air volume")
    if np.linalg.norm(source - receiver) <= _COINCIDENCE_DISTANCE:
        report.add("source", "source coincides with receiver")

    directivity = scene.source.directivity
    if directivity is not None:
        gains = np.asarray(directivity.gains, dtype=float)
        if not np.all(np.isfinite(gains)) or np.any(gains < 0.0):
            report.add("source", "directivity gains must be finite and non-negative")
        if gains.size != len(directivity.azimuths) * len(directivity.elevations) * constants.NUM_BANDS:
            report.add("source", "directivity grid size does not match its axes")

    look = np.asarray(scene.receiver.look, dtype=float)
    up = np.asarray(scene.receiver.up, dtype=float)
    if (
        abs(np.linalg.norm(look) - 1.0) > _ORIENTATION_TOLERANCE
        or abs(np.linalg.norm(up) - 1.0) > _ORIENTATION_TOLERANCE
        or abs(float(np.dot(look, up))) > _ORIENTATION_TOLERANCE
    ):
        report.add("receiver", "orientation vectors are not orthonormal")

    if not (math.isfinite(scene.speed_of_sound) and scene.speed_of_sound > 0.0):
        report.add("scene", "speed of sound must be positive")
    _check_bands(report, "scene", "air absorption", scene.air_absorption, high=None)

    return report


# ----------------------------------------------------------------------------------------
# Presets

# name: (width, length, height, mean absorption)
_LAB_ROOMS = {
    "anechoic": (3.5, 4.5, 2.5, 0.99),
    "booth1": (2.0, 2.0, 2.0, 0.50),
    "booth2": (2.1, 3.0, 2.5, 0.97),
}
_LAB_SCATTERING = 0.10

# name: (stage width, stage height)
_STAGES = {
    "stage_small": (12.0, 6.0),
    "stage_large": (24.0, 12.0),
}
_STAGE_DEPTH = 10.0
_AUDIENCE = (23.0, 41.5, 19.0)  # width, length, height
_AUDIENCE_MATERIAL = Material.uniform(0.80, 0.70)
_HALL_MATERIAL = Material.uniform(0.20, 0.10)


def _lab_preset(name):
    width, length, height, alpha = _LAB_ROOMS[name]
    center = (width / 2.0, length / 2.0)
    offset = constants.EAR_BEHIND_SOURCE / 2.0
    return Scene(
        room=Shoebox(width, length, height, ("lab",) * 6),
        materials={"lab": Material.uniform(alpha, _LAB_SCATTERING)},
        source=SourceSpec((center[0], center[1] + offset, constants.EAR_HEIGHT)),
        receiver=ReceiverSpec(
            (center[0], center[1] - offset, constants.EAR_HEIGHT),
            look=(0.0, 1.0, 0.0),
            up=(0.0, 0.0, 1.0),
        ),
        name=name,
    )


def _stage_preset(name):
    stage_width, stage_height = _STAGES[name]
    audience_width, audience_length, audience_height = _AUDIENCE
    # stage occupies y < 0, the audience box y > 0; the proscenium opening is
    # their overlap on the plane y = 0
    boxes = [
        ((-stage_width / 2.0, -_STAGE_DEPTH, 0.0), (stage_width / 2.0, 0.0, stage_height)),
        ((-audience_width / 2.0, 0.0, 0.0), (audience_width / 2.0, audience_length, audience_height)),
    ]

    def material_for(axis, high, center):
        if axis == 2 and not high and center[1] > 0.0:
            return "audience"
        return "hall"

    source = (0.0, -_STAGE_DEPTH / 2.0, constants.EAR_HEIGHT)
    receiver = (0.0, source[1] - constants.EAR_BEHIND_SOURCE, constants.EAR_HEIGHT)
    return Scene(
        room=_box_union_mesh(boxes, material_for),
        materials={"audience": _AUDIENCE_MATERIAL, "hall": _HALL_MATERIAL},
        source=SourceSpec(source),
        receiver=ReceiverSpec(receiver, look=(0.0, 1.0, 0.0), up=(0.0, 0.0, 1.0)),
        name=name,
    )


def preset_scene(name):
    """
    Build one of the built-in scenes.

    The laboratory rooms are shoeboxes with a constant mean absorption; the
    stages are a stage box coupled to an audience box through the proscenium
    opening. The source stands at the centre (stages) or near the centre (lab
    rooms) at 1.5 m, with the ear 0.5 m behind it at the same height, facing +y.

    :param name: One of anechoic, booth1, booth2, stage_small, stage_large.
    :type name: str

    :raises SceneError: For an unknown preset name.
    :rtype: Scene
    """

    if name in _LAB_ROOMS:
        return _lab_preset(name)
    if name in _STAGES:
        return _stage_preset(name)
    raise SceneError(
        "Unknown preset '%s'. Choose one of: %s" % (name, ", ".join(constants.PRESET_NAMES))
    )


# ----------------------------------------------------------------------------------------
# Text format


def parse_sections(text):
    """
    Split the ``key = value`` text format into sections.

    :return: List of (section name, section argument, [(key, value), ...]). Keys
        before the first section belong to a section named "".
    :rtype: list
    """

    sections = [("", None, [])]
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            header = line[1:-1].split(None, 1)
            sections.append((header[0], header[1].strip() if len(header) > 1 else None, []))
            continue
        if "=" not in line:
            raise SceneError("line %d: expected 'key = value', got %r" % (number, raw))
        key, value = line.split("=", 1)
        sections[-1][2].append((key.strip(), value.strip()))
    return sections


def _floats(value, count=None, where=""):
    try:
        values = tuple(float(v) for v in value.split(","))
    except ValueError:
        raise SceneError("%s: expected comma-separated numbers, got %r" % (where, value))
    if count is not None and len(values) != count:
        raise SceneError("%s: expected %d values, got %d" % (where, count, len(values)))
    return values


def _fmt(values):
    return ", ".join(repr(float(v)) for v in values)


def read_directivity(path):
    """
    Read a ``DIRGRID v1 <n_az> <n_el>`` file: one row per grid point with
    azimuth_deg, elevation_deg and one gain per band, azimuth-major.

    :rtype: Directivity
    """

    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = [l for l in (line.strip() for line in handle) if l and not l.startswith("#")]
    except OSError as error:
        raise SceneError("Cannot read directivity file '%s': %s" % (path, error))
    header = lines[0].split() if lines else []
    if len(header) != 4 or header[:2] != ["DIRGRID", "v1"]:
        raise SceneError("'%s' is not a DIRGRID v1 file" % path)
    n_az, n_el = int(header[2]), int(header[3])
    rows = [tuple(float(v) for v in line.replace(",", " ").split()) for line in lines[1:]]
    if len(rows) != n_az * n_el or any(len(r) != 2 + constants.NUM_BANDS for r in rows):
        raise SceneError("'%s' does not contain %d x %d grid rows" % (path, n_az, n_el))
    return _directivity_from_rows(rows, path)


def _directivity_from_rows(rows, path=None):
    azimuths = tuple(sorted({r[0] for r in rows}))
    elevations = tuple(sorted({r[1] for r in rows}))
    table = {(r[0], r[1]): tuple(r[2:]) for r in rows}
    try:
        gains = tuple(
            tuple(table[(az, el)] for el in elevations) for az in azimuths
        )
    except KeyError:
        raise SceneError("Directivity grid is not rectangular")
    return Directivity(azimuths, elevations, gains, path=path)


def parse_scene(text, base_dir=None):
    """
    Parse the scene text format.

    :param text: The scene file contents.
    :param base_dir: Directory relative data file paths are resolved against.

    :raises SceneError: On malformed input.
    :rtype: Scene
    """

    name = ""
    speed_of_sound = constants.DEFAULT_SPEED_OF_SOUND
    air_absorption = (0.0,) * constants.NUM_BANDS
    room = None
    materials = {}
    source = None
    receiver = None

    def resolve(path):
        if base_dir and not os.path.isabs(path):
            return os.path.join(base_dir, path)
        return path

    for section, argument, entries in parse_sections(text):
        values = dict(entries)
        if section == "":
            name = values.get("name", name)
            if "speed_of_sound" in values:
                speed_of_sound = float(values["speed_of_sound"])
            if "air_absorption" in values:
                air_absorption = _bands(_floats(values["air_absorption"], where="air_absorption"))
        elif section == "room":
            kind = values.get("type", "shoebox")
            if kind == "shoebox":
                dims = _floats(values.get("dimensions", ""), 3, "room dimensions")
                walls = tuple(
                    w.strip() for w in values.get("wall_materials", "default").split(",")
                )
                if len(walls) == 1:
                    walls = walls * 6
                room = Shoebox(dims[0], dims[1], dims[2], walls)
            elif kind == "mesh":
                triangles = []
                for key, value in entries:
                    if key != "face":
                        continue
                    parts = [p.strip() for p in value.split("|")]
                    if len(parts) != 4:
                        raise SceneError("face needs three vertices and a material: %r" % value)
                    vertices = tuple(_floats(p, 3, "face vertex") for p in parts[:3])
                    triangles.append(Triangle(vertices, parts[3]))
                room = Mesh(tuple(triangles))
            else:
                raise SceneError("Unknown room type '%s'" % kind)
        elif section == "material":
            if not argument:
                raise SceneError("[material] section needs an id")
            materials[argument] = Material(
                absorption=_bands(_floats(values.get("absorption", ""), where="absorption")),
                scattering=_bands(_floats(values.get("scattering", "0"), where="scattering")),
            )
        elif section == "source":
            position = _floats(values.get("position", ""), 3, "source position")
            directivity = None
            points = [
                _floats(v, 2 + constants.NUM_BANDS, "directivity_point")
                for k, v in entries
                if k == "directivity_point"
            ]
            if points:
                directivity = _directivity_from_rows(points)
            elif values.get("directivity", "omni") != "omni":
                directivity = read_directivity(resolve(values["directivity"]))
            source = SourceSpec(position, directivity)
        elif section == "receiver":
            hrtf = values.get("hrtf", "parametric")
            receiver = ReceiverSpec(
                position=_floats(values.get("position", ""), 3, "receiver position"),
                look=_floats(values.get("look", "1, 0, 0"), 3, "receiver look"),
                up=_floats(values.get("up", "0, 0, 1"), 3, "receiver up"),
                hrtf=hrtf if hrtf == "parametric" else resolve(hrtf),
                head_radius=float(values.get("head_radius", constants.DEFAULT_HEAD_RADIUS)),
            )
        elif section == "run":
            # run settings share the file format and are read by the CLI
            continue
        else:
            raise SceneError("Unknown section [%s]" % section)

    if room is None or source is None or receiver is None:
        raise SceneError("A scene needs [room], [source] and [receiver] sections")
    return Scene(room, materials, source, receiver, speed_of_sound, air_absorption, name)


def emit_scene(scene):
    """
    Write a scene in the text format. Floats are written with ``repr`` so that
    :func:`parse_scene` restores them exactly.

    :rtype: str
    """

    lines = ["# auralab scene"]
    if scene.name:
        lines.append("name = %s" % scene.name)
    lines.append("speed_of_sound = %r" % float(scene.speed_of_sound))
    lines.append("air_absorption = %s" % _fmt(scene.air_absorption))
    lines.append("")

    lines.append("[room]")
    room = scene.room
    if isinstance(room, Shoebox):
        lines.append("type = shoebox")
        lines.append("dimensions = %s" % _fmt((room.width, room.length, room.height)))
        lines.append("wall_materials = %s" % ", ".join(room.wall_materials))
    else:
        lines.append("type = mesh")
        for triangle in room.triangles:
            lines.append(
                "face = %s | %s"
                % (" | ".join(_fmt(v) for v in triangle.vertices), triangle.material)
            )
    lines.append("")

    for material_id, material in scene.materials.items():
        lines.append("[material %s]" % material_id)
        lines.append("absorption = %s" % _fmt(material.absorption))
        lines.append("scattering = %s" % _fmt(material.scattering))
        lines.append("")

    lines.append("[source]")
    lines.append("position = %s" % _fmt(scene.source.position))
    directivity = scene.source.directivity
    if directivity is None:
        lines.append("directivity = omni")
    else:
        for i, az in enumerate(directivity.azimuths):
            for j, el in enumerate(directivity.elevations):
                lines.append(
                    "directivity_point = %s" % _fmt((az, el) + tuple(directivity.gains[i][j]))
                )
    lines.append("")

    receiver = scene.receiver
    lines.append("[receiver]")
    lines.append("position = %s" % _fmt(receiver.position))
    lines.append("look = %s" % _fmt(receiver.look))
    lines.append("up = %s" % _fmt(receiver.up))
    lines.append("hrtf = %s" % receiver.hrtf)
    lines.append("head_radius = %r" % float(receiver.head_radius))
    lines.append("")
    return "\n".join(lines)


def load_scene(name_or_path):
    """
    Resolve a preset name or read a scene file.

    :raises SceneError: When the argument is neither a preset nor a readable file.
    :rtype: Scene
    """

    if name_or_path in constants.PRESET_NAMES:
        return preset_scene(name_or_path)
    if not os.path.isfile(name_or_path):
        raise SceneError("'%s' is neither a preset nor a scene file" % name_or_path)
    with open(name_or_path, "r", encoding="utf-8") as handle:
        scene = parse_scene(handle.read(), base_dir=os.path.dirname(name_or_path))
    if not scene.name:
        scene = Scene(
            scene.room,
            scene.materials,
            scene.source,
            scene.receiver,
            scene.speed_of_sound,
            scene.air_absorption,
            os.path.splitext(os.path.basename(name_or_path))[0],
        )
    logger.debug("Loaded scene '%s' from %s" % (scene.name, name_or_path))
    return scene
