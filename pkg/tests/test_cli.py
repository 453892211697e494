# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

import json
import os

import pytest
from unittest.mock import MagicMock, patch

from auralab import constants
from auralab.api import SimulationManager
from auralab.api.manager import MANIFEST_NAME, sha256_file
from auralab.cli import RunConfig, build_parser, main, read_run_section
from auralab.errors import ConfigError, SceneError, StageError


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# a run\n"
        "[run]\n"
        "rays = 2000\n"
        "seed = 5\n"
        "scene_lab = booth1, booth2\n"
    )
    return str(path)


@pytest.fixture
def checked_out_dir(out_dir):
    """An output directory holding one file and its manifest."""

    path = os.path.join(out_dir, "report.json")
    with open(path, "w") as handle:
        handle.write("{}\n")
    with open(os.path.join(out_dir, MANIFEST_NAME), "w") as handle:
        json.dump({"files": {"report.json": sha256_file(path)}}, handle)
    return out_dir


class TestRunConfig(object):
    def test_defaults(self):
        config = RunConfig()
        for name, definition in constants.SETTINGS.items():
            assert config.get_setting(name) == definition["default_value"]
        assert config.get_setting("input", "fallback") == "fallback"
        config.validate()

    def test_priority(self):
        config = RunConfig({"rays": "10"}, {"rays": "20", "seed": "5"})
        assert config.get_setting("rays") == 10
        assert config.get_setting("seed") == 5
        assert config.get_setting("order") == constants.DEFAULT_ISM_ORDER
        assert config.to_dict()["rays"] == 10

    def test_lists(self):
        config = RunConfig({"emit": "wav, json", "scene_lab": "booth1"})
        assert config.get_setting("emit") == ["wav", "json"]
        assert config.get_setting("scene_lab") == ["booth1"]

    @pytest.mark.parametrize(
        "overrides,file_values,message",
        [
            ({"rays": "many"}, None, "rays: cannot read"),
            ({"rays": "0"}, None, "rays must be positive"),
            ({"max_time": "-1"}, None, "max_time must be positive"),
            ({"order": "-1"}, None, "order must be >= 0"),
            ({"scene_stage": ","}, None, "scene_stage names no scene"),
            ({"emit": "wav,mp3"}, None, "emit: unknown kinds mp3"),
            (None, {"colour": "red"}, "unknown setting 'colour'"),
        ],
    )
    def test_validate(self, overrides, file_values, message):
        with pytest.raises(ConfigError) as error:
            RunConfig(overrides, file_values).validate()
        assert message in str(error.value)

    def test_errors_are_collected(self):
        with pytest.raises(ConfigError) as error:
            RunConfig({"rays": "0", "seed": "x"}, errors=["broken file"]).validate()
        message = str(error.value)
        assert "broken file" in message
        assert "seed: cannot read" in message
        assert "rays must be positive" in message

    def test_config_file(self, config_file):
        assert read_run_section(config_file) == {
            "rays": "2000",
            "seed": "5",
            "scene_lab": "booth1, booth2",
        }
        args = build_parser().parse_args(["--config", config_file, "simulate", "--seed", "9"])
        config = RunConfig.from_args(args)
        assert config.get_setting("rays") == 2000
        assert config.get_setting("seed") == 9
        assert config.get_setting("scene_lab") == ["booth1", "booth2"]
        config.validate()

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(ConfigError):
            read_run_section(str(tmp_path / "missing.cfg"))
        args = build_parser().parse_args(["--config", str(tmp_path / "missing.cfg"), "simulate"])
        with pytest.raises(ConfigError):
            RunConfig.from_args(args).validate()


class TestParser(object):
    def test_flags_on_either_side(self):
        args = build_parser().parse_args(["--rays", "100", "pipeline", "--out", "here"])
        assert args.command == "pipeline"
        assert args.rays == "100"
        assert args.out == "here"
        # unset flags stay out of the namespace
        assert not hasattr(args, "seed")

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as error:
            build_parser().parse_args(["--version"])
        assert error.value.code == 0
        assert "auralab" in capsys.readouterr().out


class TestMain(object):
    def test_no_command(self):
        assert main([]) == 2

    def test_missing_input(self, out_dir):
        argv = [
            "simulate",
            "--scene-stage", "stage_small",
            "--scene-lab", "booth1",
            "--input", os.path.join(out_dir, "missing.wav"),
            "--out", out_dir,
        ]
        assert main(argv) == 2

    def test_invalid_setting(self, out_dir):
        assert main(["pipeline", "--rays", "-5", "--out", out_dir]) == 2

    def test_stage_failure(self, out_dir):
        failure = StageError("simulate", SceneError("ray escaped"))
        with patch.object(SimulationManager, "run_pipeline", side_effect=failure):
            assert main(["pipeline", "--out", out_dir]) == 1

    def test_pipeline(self, out_dir):
        with patch.object(SimulationManager, "run_pipeline", return_value=[]) as run:
            assert main(["pipeline", "--out", out_dir]) == 0
        run.assert_called_once_with()

    @pytest.mark.parametrize("command", ["simulate", "auralize", "analyze"])
    def test_single_stage(self, out_dir, command):
        with patch.object(SimulationManager, "validate") as validate, patch.object(
            SimulationManager, command, return_value=[]
        ) as run, patch.object(SimulationManager, "write_manifest") as write_manifest:
            assert main([command, "--out", out_dir]) == 0
        validate.assert_called_once_with()
        run.assert_called_once_with()
        write_manifest.assert_called_once_with()

    @pytest.mark.parametrize("argv", [["check"], ["--check"]])
    def test_check(self, checked_out_dir, argv):
        assert main(argv + ["--out", checked_out_dir]) == 0
        with open(os.path.join(checked_out_dir, "report.json"), "a") as handle:
            handle.write(" ")
        assert main(argv + ["--out", checked_out_dir]) == 1

    def test_check_without_manifest(self, out_dir):
        assert main(["check", "--out", out_dir]) == 1

    def test_debug(self):
        log_manager = MagicMock()
        with patch("auralab.cli.sgtk.LogManager", return_value=log_manager):
            assert main(["--debug"]) == 2
        log_manager.initialize_custom_handler.assert_called_once_with()
        assert log_manager.global_debug is True


@pytest.mark.slow
def test_acceptance(out_dir):
    argv = [
        "pipeline",
        "--scene-stage", "stage_small,stage_large",
        "--scene-lab", "anechoic,booth1,booth2",
        "--rays", "100000",
        "--out", out_dir,
    ]
    assert main(argv) == 0
    assert main(["check", "--out", out_dir]) == 0

    with open(os.path.join(out_dir, "report.json")) as handle:
        report = json.load(handle)
    for stage_name in ("stage_small", "stage_large"):
        anechoic = report["anechoic/%s" % stage_name]
        booth1 = report["booth1/%s" % stage_name]
        booth2 = report["booth2/%s" % stage_name]

        # residual sound grows with the reverberance of the lab
        assert anechoic["median_db"] < booth2["median_db"] < booth1["median_db"]
        assert booth1["median_db"] > 1.0
        assert booth1["verdict"] == "audible"
        assert anechoic["median_db"] < 0.2
        assert anechoic["verdict"] == "transparent"
        assert booth2["verdict"] != "audible"
        assert (
            anechoic["snr_median_db"] > booth2["snr_median_db"] > booth1["snr_median_db"]
        )
