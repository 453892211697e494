# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

"""
Command line entry point.

    auralab pipeline --scene-stage stage_small,stage_large --scene-lab anechoic,booth1,booth2
    auralab simulate --config run.cfg --rays 20000
    auralab check --out auralab_out

Settings resolve as command line flags, then the ``[run]`` section of the
``--config`` file, then the defaults of :data:`auralab.constants.SETTINGS`.
Exit codes: 0 on success, 2 when the configuration is invalid, 1 on any other
failure.
"""

import argparse
import os
import sys

import sgtk

from . import __version__, constants
from .api import SimulationManager
from .api.manager import CONFIG_STAGE
from .errors import AuralabError, ConfigError, SceneError, StageError
from .scene import parse_sections

logger = sgtk.LogManager.get_logger(__name__)

# flag name -> setting name
_FLAGS = {
    "--scene-stage": "scene_stage",
    "--scene-lab": "scene_lab",
    "--input": "input",
    "--out": "out",
    "--sample-rate": "sample_rate",
    "--rays": "rays",
    "--seed": "seed",
    "--order": "order",
    "--max-time": "max_time",
    "--window-ms": "window_ms",
    "--jnd-db": "jnd_db",
    "--gate-db": "gate_db",
    "--emit": "emit",
}


class RunConfig(object):
    """
    Resolved run settings. Values are coerced to the types declared in
    :data:`auralab.constants.SETTINGS`; problems are collected and reported by
    :meth:`validate`.
    """

    def __init__(self, overrides=None, file_values=None, errors=None):
        """
        :param overrides: Settings given on the command line, highest priority.
        :param file_values: Settings read from a config file.
        :param errors: Problems found while reading the config file.
        """

        self._errors = list(errors or [])
        self._values = {}
        for name, definition in constants.SETTINGS.items():
            value = definition["default_value"]
            for source in (file_values or {}, overrides or {}):
                if source.get(name) is not None:
                    value = source[name]
            try:
                self._values[name] = self._coerce(name, value)
            except (TypeError, ValueError):
                self._errors.append("%s: cannot read %r as %s" % (name, value, definition["type"]))
                self._values[name] = definition["default_value"]

        unknown = set(file_values or {}) - set(constants.SETTINGS)
        for name in sorted(unknown):
            self._errors.append("unknown setting '%s'" % name)

    @staticmethod
    def _coerce(name, value):
        if value is None:
            return None
        kind = constants.SETTINGS[name]["type"]
        if kind == "list":
            if isinstance(value, str):
                value = value.split(",")
            return [str(v).strip() for v in value if str(v).strip()]
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        return str(value)

    @classmethod
    def from_args(cls, args):
        """Build the configuration from parsed command line arguments."""

        overrides = {
            setting: getattr(args, setting)
            for setting in _FLAGS.values()
            if getattr(args, setting, None) is not None
        }
        file_values = {}
        errors = []
        config_path = getattr(args, "config", None)
        if config_path:
            try:
                file_values = read_run_section(config_path)
            except (ConfigError, SceneError) as error:
                errors.append(str(error))
        return cls(overrides, file_values, errors)

    def get_setting(self, name, default=None):
        """
        Get the value of a setting.

        :param name: The setting name, a key of :data:`auralab.constants.SETTINGS`.
        :param default: Returned when the setting has no value.
        """

        value = self._values.get(name)
        return default if value is None else value

    def to_dict(self):
        return dict(self._values)

    def validate(self):
        """
        :raises ConfigError: Listing every invalid setting.
        """

        errors = list(self._errors)
        positive = ("sample_rate", "rays", "max_time", "window_ms", "jnd_db", "gate_db")
        for name in positive:
            if not self._values[name] > 0:
                errors.append("%s must be positive, got %r" % (name, self._values[name]))
        if self._values["order"] < 0:
            errors.append("order must be >= 0, got %r" % self._values["order"])
        for name in ("scene_stage", "scene_lab"):
            if not self._values[name]:
                errors.append("%s names no scene" % name)
        unknown = set(self._values["emit"]) - set(constants.EMIT_KINDS)
        if unknown:
            errors.append(
                "emit: unknown kinds %s (choose from %s)"
                % (", ".join(sorted(unknown)), ", ".join(constants.EMIT_KINDS))
            )
        if errors:
            raise ConfigError("; ".join(errors))


def read_run_section(path):
    """
    Read the ``[run]`` section of a config file written in the scene file syntax.

    :raises ConfigError: When the file cannot be read.
    :rtype: dict
    """

    if not os.path.isfile(path):
        raise ConfigError("Config file '%s' does not exist" % path)
    with open(path, "r", encoding="utf-8") as handle:
        sections = parse_sections(handle.read())
    values = {}
    for section, _, entries in sections:
        if section == "run":
            values.update(dict(entries))
    return values


def build_parser():
    """
    :rtype: argparse.ArgumentParser
    """

    # SUPPRESS keeps unset flags out of the namespace so they never shadow the
    # config file
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="Config file with a [run] section")
    common.add_argument("--scene-stage", dest="scene_stage", help="Stage presets or scene files, comma-separated")
    common.add_argument("--scene-lab", dest="scene_lab", help="Laboratory presets or scene files, comma-separated")
    common.add_argument("--input", help="Anechoic mono WAV; the synthetic excerpt is used when omitted")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--sample-rate", dest="sample_rate", help="Sample rate in Hz")
    common.add_argument("--rays", help="Rays per scene")
    common.add_argument("--seed", help="Random seed")
    common.add_argument("--order", help="Maximum image-source order")
    common.add_argument("--max-time", dest="max_time", help="Ray-tracing histogram length in seconds")
    common.add_argument("--window-ms", dest="window_ms", help="Level window (and hop) in ms")
    common.add_argument("--jnd-db", dest="jnd_db", help="Just-noticeable difference in dB")
    common.add_argument("--gate-db", dest="gate_db", help="Analyzed dynamic range below the loudest frame")
    common.add_argument("--emit", help="Artifact kinds: wav,csv,svg,json")
    common.add_argument("--debug", action="store_true", help="Enable debug logging")

    parser = argparse.ArgumentParser(
        prog="auralab",
        description="Virtual-stage auralization and laboratory residual-sound analysis.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version="auralab %s" % __version__)
    parser.add_argument("--check", action="store_true", help="Verify the manifest of --out and exit")
    commands = parser.add_subparsers(dest="command")
    for name, help_text in (
        ("simulate", "Synthesize h_v and h_u"),
        ("auralize", "Convolve the input with h_v and h_u"),
        ("analyze", "Compute levels, statistics and verdicts"),
        ("pipeline", "Run simulate, auralize and analyze"),
        ("check", "Verify the manifest hashes of --out"),
    ):
        commands.add_parser(name, help=help_text, parents=[common])
    return parser


def cmd_simulate(manager):
    manager.validate()
    manager.simulate()
    manager.write_manifest()


def cmd_auralize(manager):
    manager.validate()
    manager.auralize()
    manager.write_manifest()


def cmd_analyze(manager):
    manager.validate()
    conditions = manager.analyze()
    manager.write_manifest()
    _log_verdicts(conditions)


def cmd_pipeline(manager):
    conditions = manager.run_pipeline()
    _log_verdicts(conditions)


def cmd_check(manager):
    """
    :return: True when every manifest digest matches.
    """

    problems = SimulationManager.verify_manifest(manager.out_dir)
    for problem in problems:
        logger.error(problem)
    if not problems:
        logger.info("All manifest entries of %s match" % manager.out_dir)
    return not problems


def _log_verdicts(conditions):
    for condition in conditions:
        entry = condition.to_dict()
        logger.info(
            "%s: median %s dB, SNR %s dB, %s"
            % (condition.key, entry["median_db"], entry["snr_median_db"], entry["verdict"])
        )


COMMANDS = {
    "simulate": cmd_simulate,
    "auralize": cmd_auralize,
    "analyze": cmd_analyze,
    "pipeline": cmd_pipeline,
}


def main(argv=None):
    """
    Run the command line interface.

    :param argv: Arguments without the program name; ``sys.argv[1:]`` when None.
    :return: The process exit code.
    :rtype: int
    """

    parser = build_parser()
    args = parser.parse_args(argv)

    log_manager = sgtk.LogManager()
    log_manager.initialize_custom_handler()
    if getattr(args, "debug", False):
        log_manager.global_debug = True

    config = RunConfig.from_args(args)
    manager = SimulationManager(config)

    command = "check" if args.check else args.command
    if command is None:
        parser.print_help()
        return 2

    try:
        if command == "check":
            return 0 if cmd_check(manager) else 1
        COMMANDS[command](manager)
    except StageError as error:
        logger.error(str(error))
        return 2 if error.stage == CONFIG_STAGE else 1
    except AuralabError as error:
        logger.error(str(error))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
