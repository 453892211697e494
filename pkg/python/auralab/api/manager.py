# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

import csv
import hashlib
import json
import os
import platform

import numpy as np
import scipy
import sgtk

from .item import LabCondition
from .. import __version__, constants
from ..analysis import boxplot_stats, gate_frames, jnd_verdict
from ..audio_io import read_wav, write_wav
from ..brir import ImpulseResponsePair, check_nyquist, direct_path_arrival, load_hrtf, synthesize_brir
from ..decorators import stage
from ..dsp import Signal, convolve, delta_l_track, level_track, mix, snr_track
from ..errors import ConfigError, SignalError
from ..ism import arrivals_to_csv, ism_arrivals
from ..raytrace import histogram_to_csv, trace
from ..scene import load_scene, validate_scene
from ..stimulus import synthetic_excerpt
from ..svg import boxplot_svg, levels_svg

logger = sgtk.LogManager.get_logger(__name__)

MANIFEST_NAME = "manifest.json"
CONFIG_STAGE = "config validation"


def sha256_file(path):
    """Hex SHA-256 digest of a file."""

    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _write_json(path, data):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, indent=2, sort_keys=True)
        handle.write("\n")


class SimulationManager(object):
    """This class is used for running the simulation, auralization and analysis stages of a run."""

    def __init__(self, config):
        """
        Initialize the manager.

        :param config: Run configuration exposing ``get_setting(name, default=None)``
            and ``validate()``.
        """

        self._config = config
        self._scenes = None
        self._artifacts = []

    # ----------------------------------------------------------------------------------------
    # Properties

    @property
    def out_dir(self):
        """Get the output directory of the run."""
        return self._config.get_setting("out")

    @property
    def artifacts(self):
        """Get the paths of the files written so far."""
        return list(self._artifacts)

    def _setting(self, name):
        return self._config.get_setting(name)

    def _emits(self, kind):
        return kind in self._setting("emit")

    def _path(self, *parts):
        path = os.path.join(self.out_dir, *parts)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        return path

    def _written(self, path):
        if path not in self._artifacts:
            self._artifacts.append(path)
        logger.info("Wrote %s" % path)

    # ----------------------------------------------------------------------------------------
    # Scenes and conditions

    def scenes(self):
        """
        Load the stage and laboratory scenes of the run.

        :return: (stage scenes, lab scenes), each a list of :class:`~auralab.scene.Scene`.
        :rtype: tuple
        """

        if self._scenes is None:
            stages = [load_scene(name) for name in self._setting("scene_stage")]
            labs = [load_scene(name) for name in self._setting("scene_lab")]
            self._scenes = (stages, labs)
        return self._scenes

    def conditions(self):
        """
        Every (room, stage) combination of the run.

        :rtype: list[LabCondition]
        """

        stages, labs = self.scenes()
        return [LabCondition(lab.name, stage_scene.name) for lab in labs for stage_scene in stages]

    # ----------------------------------------------------------------------------------------
    # Stages

    @stage(CONFIG_STAGE)
    def validate(self):
        """
        Validate the configuration and every scene it names, and create the output
        directory.

        :raises StageError: Naming the "config validation" stage.
        """

        self._config.validate()
        check_nyquist(self._setting("sample_rate"))

        stages, labs = self.scenes()
        for scene in stages + labs:
            report = validate_scene(scene)
            if not report.is_valid:
                raise ConfigError(
                    "Scene '%s' is invalid: %s"
                    % (scene.name, "; ".join(str(v) for v in report))
                )

        input_path = self._setting("input")
        if input_path and not os.path.isfile(input_path):
            raise ConfigError("Input file '%s' does not exist" % input_path)

        try:
            os.makedirs(self.out_dir, exist_ok=True)
        except OSError as error:
            raise ConfigError("Cannot create output directory '%s': %s" % (self.out_dir, error))
        if not os.access(self.out_dir, os.W_OK):
            raise ConfigError("Output directory '%s' is not writable" % self.out_dir)
        logger.debug("Configuration is valid")

    def simulate_stage(self, scene):
        """
        Virtual-stage response h_v: the analytic direct path plus every ray-traced
        reflection.

        :rtype: :class:`~auralab.brir.ImpulseResponsePair`
        """

        arrivals = [direct_path_arrival(scene)]
        histogram = trace(
            scene,
            self._setting("rays"),
            self._setting("seed"),
            max_time=self._setting("max_time"),
            skip_direct=True,
        )
        self._export_paths(scene.name, arrivals, histogram)
        return self._synthesize(scene, arrivals, histogram)

    def simulate_lab(self, scene):
        """
        Residual-room response h_u without the direct path: image sources up to the
        configured order and rays for the higher orders. Mesh rooms are ray-traced
        only.

        :rtype: :class:`~auralab.brir.ImpulseResponsePair`
        """

        order = self._setting("order")
        if scene.is_shoebox:
            arrivals = ism_arrivals(scene, order, skip_direct=True)
            skip_order_leq = order
        else:
            arrivals = []
            skip_order_leq = 0
        histogram = trace(
            scene,
            self._setting("rays"),
            self._setting("seed"),
            max_time=self._setting("max_time"),
            skip_direct=True,
            skip_order_leq=skip_order_leq,
        )
        self._export_paths(scene.name, arrivals, histogram)
        return self._synthesize(scene, arrivals, histogram)

    def _synthesize(self, scene, arrivals, histogram):
        return synthesize_brir(
            arrivals,
            histogram,
            load_hrtf(scene.receiver, scene.speed_of_sound),
            sample_rate=self._setting("sample_rate"),
            seed=self._setting("seed"),
            look=scene.receiver.look,
            up=scene.receiver.up,
        )

    def _export_paths(self, name, arrivals, histogram):
        if not self._emits("csv"):
            return
        if arrivals:
            path = self._path("arrivals_%s.csv" % name)
            arrivals_to_csv(arrivals, path)
            self._written(path)
        path = self._path("histogram_%s.csv" % name)
        histogram_to_csv(histogram, path)
        self._written(path)

    @sgtk.LogManager.log_timing
    @stage("simulate")
    def simulate(self):
        """
        Synthesize h_v for every stage and h_u for every laboratory room, write
        them as 2-channel float WAV files per condition and record the provenance.

        :return: {"h_v": {stage: pair}, "h_u": {room: pair}}
        :rtype: dict
        """

        stages, labs = self.scenes()
        responses = {"h_v": {}, "h_u": {}}
        for scene in stages:
            logger.debug("Simulating stage '%s'" % scene.name)
            responses["h_v"][scene.name] = self.simulate_stage(scene)
        for scene in labs:
            logger.debug("Simulating laboratory room '%s'" % scene.name)
            responses["h_u"][scene.name] = self.simulate_lab(scene)

        if self._emits("wav"):
            for condition in self.conditions():
                for kind, name in (("h_v", condition.stage), ("h_u", condition.room)):
                    path = self._path(condition.directory, "%s.wav" % kind)
                    write_wav(path, responses[kind][name].to_signal())
                    self._written(path)

        self._write_provenance(stages, labs)
        return responses

    def _write_provenance(self, stages, labs):
        if not self._emits("json"):
            return
        path = self._path("provenance.json")
        _write_json(
            path,
            {
                "seed": self._setting("seed"),
                "rays": self._setting("rays"),
                "order": self._setting("order"),
                "max_time_s": self._setting("max_time"),
                "sample_rate": self._setting("sample_rate"),
                "stages": [scene.name for scene in stages],
                "rooms": [scene.name for scene in labs],
                "versions": {
                    "auralab": __version__,
                    "numpy": np.__version__,
                    "scipy": scipy.__version__,
                    "python": platform.python_version(),
                },
            },
        )
        self._written(path)

    def load_input(self):
        """
        The dry signal: the configured recording mixed down to mono, or the
        built-in synthetic excerpt.

        :rtype: :class:`~auralab.dsp.Signal`
        """

        input_path = self._setting("input")
        if not input_path:
            return synthetic_excerpt(self._setting("sample_rate"))
        x = read_wav(input_path)
        if x.channels > 1:
            logger.warning("Mixing %d-channel input '%s' down to mono" % (x.channels, input_path))
            x = Signal(x.samples.mean(axis=0), x.sample_rate)
        return x

    def _read_responses(self):
        responses = {"h_v": {}, "h_u": {}}
        for condition in self.conditions():
            for kind, name in (("h_v", condition.stage), ("h_u", condition.room)):
                if name not in responses[kind]:
                    path = os.path.join(self.out_dir, condition.directory, "%s.wav" % kind)
                    responses[kind][name] = ImpulseResponsePair.from_signal(read_wav(path))
        return responses

    @sgtk.LogManager.log_timing
    @stage("auralize")
    def auralize(self, responses=None, x=None):
        """
        Convolve the dry signal with h_v and h_u and sum the results:
        ``y_v = h_v * x``, ``y_u = h_u * x`` and ``y_t = y_v + y_u``. All three are
        returned at the length of y_t.

        :param responses: Output of :meth:`simulate`; read from the output
            directory when omitted.
        :param x: Dry signal; :meth:`load_input` when omitted.

        :return: {condition: (y_v, y_u, y_t)}
        :rtype: dict
        """

        if responses is None:
            responses = self._read_responses()
        if x is None:
            x = self.load_input()

        y_v_cache = {}
        y_u_cache = {}
        signals = {}
        for condition in self.conditions():
            if condition.stage not in y_v_cache:
                y_v_cache[condition.stage] = convolve(x, responses["h_v"][condition.stage])
            if condition.room not in y_u_cache:
                y_u_cache[condition.room] = convolve(x, responses["h_u"][condition.room])
            y_v = y_v_cache[condition.stage]
            y_u = y_u_cache[condition.room]
            y_t = mix(y_v, y_u)
            signals[condition] = (y_v.padded(y_t.length), y_u.padded(y_t.length), y_t)

            if self._emits("wav"):
                for name, sig in zip(("y_v", "y_u", "y_t"), signals[condition]):
                    path = self._path(condition.directory, "%s.wav" % name)
                    write_wav(path, sig)
                    self._written(path)
        return signals

    def _read_signals(self):
        signals = {}
        for condition in self.conditions():
            signals[condition] = tuple(
                read_wav(os.path.join(self.out_dir, condition.directory, "%s.wav" % name))
                for name in ("y_v", "y_u", "y_t")
            )
        return signals

    def analyze_condition(self, condition, y_v, y_u, y_t):
        """
        Compute the level tracks, gate, boxplot statistics and verdict of one condition.

        :raises SignalError: For empty or length-mismatched signals.
        :rtype: LabCondition
        """

        if not (y_v.length == y_u.length == y_t.length) or y_v.length == 0:
            raise SignalError(
                "%s: signals must be non-empty and of equal length (%d, %d, %d)"
                % (condition.key, y_v.length, y_u.length, y_t.length)
            )
        window = self._setting("window_ms") / 1000.0
        lv = level_track(y_v, window)
        lu = level_track(y_u, window)
        lt = level_track(y_t, window)
        condition.tracks = {
            "L_v": lv,
            "L_u": lu,
            "L_t": lt,
            "snr": snr_track(lv, lu),
            "delta_l": delta_l_track(lt, lv),
        }
        condition.gate = gate_frames(lv, self._setting("gate_db"))

        samples = condition.gated_delta_l
        if samples.size == 0:
            logger.warning("%s: no frame passed the %g dB gate" % (condition.key, self._setting("gate_db")))
            return condition
        condition.stats = boxplot_stats(samples)
        condition.verdict = jnd_verdict(condition.stats, self._setting("jnd_db"))
        logger.debug(
            "%s: median level difference %.3f dB, %s"
            % (condition.key, condition.stats.median, condition.verdict.classification)
        )
        return condition

    @sgtk.LogManager.log_timing
    @stage("analyze")
    def analyze(self, signals=None):
        """
        Analyze every condition and write levels.csv and tracks.csv per condition,
        report.json, boxplot.svg and levels.svg.

        :param signals: Output of :meth:`auralize`; read from the output directory
            when omitted.
        :rtype: list[LabCondition]
        """

        if signals is None:
            signals = self._read_signals()
        conditions = [self.analyze_condition(c, *signals[c]) for c in self.conditions()]

        if self._emits("csv"):
            for condition in conditions:
                self._write_levels(condition)
        if self._emits("json"):
            path = self._path("report.json")
            _write_json(path, {c.key: c.to_dict() for c in conditions})
            self._written(path)
        if self._emits("svg"):
            path = self._path("boxplot.svg")
            boxplot_svg([(c.key, c.stats) for c in conditions], path, jnd=self._setting("jnd_db"))
            self._written(path)
            path = self._path("levels.svg")
            levels_svg(
                [
                    (c.key, {"L_v": c.tracks["L_v"], "L_u": c.tracks["L_u"], "SNR": c.tracks["snr"]})
                    for c in conditions
                ],
                path,
            )
            self._written(path)
        return conditions

    def _write_levels(self, condition):
        tracks = condition.tracks
        gated = condition.gate
        delta_l = tracks["delta_l"]

        path = self._path(condition.directory, "levels.csv")
        delta_l.to_csv(path, mask=gated)
        self._written(path)

        names = ("L_v", "L_u", "L_t", "snr", "delta_l")
        path = self._path(condition.directory, "tracks.csv")
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t_s"] + ["%s_db" % n for n in names] + ["gated"])
            for i, t in enumerate(delta_l.times):
                writer.writerow(
                    [repr(float(t))]
                    + [repr(float(tracks[n].values[i])) for n in names]
                    + [int(gated[i])]
                )
        self._written(path)

    # ----------------------------------------------------------------------------------------
    # Manifest

    def write_manifest(self):
        """
        Record the SHA-256 digest of every file written by this manager. Entries
        of an existing manifest whose files still exist are kept, so separate
        simulate, auralize and analyze invocations build up one manifest.

        :return: Path of the manifest.
        """

        path = self._path(MANIFEST_NAME)
        files = {}
        try:
            with open(path, "r", encoding="utf-8") as handle:
                previous = json.load(handle).get("files", {})
        except (OSError, ValueError, AttributeError):
            previous = {}
        for name in sorted(previous):
            target = os.path.join(self.out_dir, *name.split("/"))
            if os.path.isfile(target):
                files[name] = sha256_file(target)

        for artifact in sorted(self._artifacts):
            files[os.path.relpath(artifact, self.out_dir).replace(os.sep, "/")] = sha256_file(artifact)

        _write_json(path, {"files": files})
        logger.info("Wrote manifest of %d files to %s" % (len(files), path))
        return path

    @staticmethod
    def verify_manifest(out_dir):
        """
        Compare the files of a run against its manifest.

        :raises ConfigError: When the manifest is missing or unreadable.
        :return: Problems found, empty when every digest matches.
        :rtype: list[str]
        """

        path = os.path.join(out_dir, MANIFEST_NAME)
        try:
            with open(path, "r", encoding="utf-8") as handle:
                files = json.load(handle)["files"]
        except (OSError, ValueError, KeyError) as error:
            raise ConfigError("Cannot read manifest '%s': %s" % (path, error))

        problems = []
        for name, digest in sorted(files.items()):
            target = os.path.join(out_dir, *name.split("/"))
            if not os.path.isfile(target):
                problems.append("%s: missing" % name)
            elif sha256_file(target) != digest:
                problems.append("%s: digest mismatch" % name)
        return problems

    @sgtk.LogManager.log_timing
    def run_pipeline(self):
        """
        Validate, simulate, auralize and analyze, then write the manifest.

        :rtype: list[LabCondition]
        """

        self.validate()
        responses = self.simulate()
        signals = self.auralize(responses)
        conditions = self.analyze(signals)
        self.write_manifest()
        return conditions
