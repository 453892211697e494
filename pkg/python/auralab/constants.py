# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

# octave band centres used by every per-band quantity
BAND_CENTERS_HZ = (62.5, 125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0)
NUM_BANDS = len(BAND_CENTERS_HZ)

DEFAULT_SPEED_OF_SOUND = 343.0
DEFAULT_SAMPLE_RATE = 48000

# image sources
DEFAULT_ISM_ORDER = 2

# ray tracer
DEFAULT_RECEIVER_RADIUS = 0.25
DEFAULT_BIN_WIDTH = 0.001
DEFAULT_MAX_TIME = 1.5
ENERGY_FLOOR = 1e-12
RAY_BATCH_SIZE = 4096
SURFACE_OFFSET = 1e-7
THREADS_ENV_VAR = "AURALAB_THREADS"

# binaural synthesis
DEFAULT_HEAD_RADIUS = 0.0875
BAND_FILTER_TAPS = 513
HRTF_FIR_LENGTH = 256
HRTF_BASE_DELAY = 32
HEAD_SHADOW_ALPHA_MIN = 0.1
HEAD_SHADOW_THETA_MIN_DEG = 150.0

# level analysis
DEFAULT_WINDOW = 0.002
LEVEL_FLOOR_DB = -120.0
DEFAULT_JND_DB = 1.0
DEFAULT_GATE_DB = 40.0
WHISKER_IQR_MULTIPLIER = 1.5

# presets
LAB_ROOMS = ("anechoic", "booth1", "booth2")
STAGES = ("stage_small", "stage_large")
PRESET_NAMES = ("anechoic", "booth1", "booth2", "stage_small", "stage_large")
EAR_HEIGHT = 1.5
EAR_BEHIND_SOURCE = 0.5

EMIT_KINDS = ("wav", "csv", "svg", "json")

# Run settings. Each entry mirrors a typed configuration block: the CLI flags,
# the [run] section of a config file and these defaults are resolved in that
# order by RunConfig.
SETTINGS = {
    "scene_stage": {
        "type": "list",
        "default_value": list(STAGES),
        "description": "Stage scene presets or scene file paths used to build h_v.",
    },
    "scene_lab": {
        "type": "list",
        "default_value": list(LAB_ROOMS),
        "description": "Laboratory room presets or scene file paths used to build h_u.",
    },
    "input": {
        "type": "str",
        "default_value": None,
        "description": "Anechoic recording (mono WAV). The built-in synthetic excerpt "
        "is used when empty.",
    },
    "out": {
        "type": "str",
        "default_value": "auralab_out",
        "description": "Directory receiving every artifact of the run.",
    },
    "sample_rate": {
        "type": "int",
        "default_value": DEFAULT_SAMPLE_RATE,
        "description": "Sample rate of the synthesized impulse responses in Hz.",
    },
    "rays": {
        "type": "int",
        "default_value": 100000,
        "description": "Number of rays emitted per scene by the ray tracer.",
    },
    "seed": {
        "type": "int",
        "default_value": 20240601,
        "description": "Seed for ray tracing and late-field synthesis.",
    },
    "order": {
        "type": "int",
        "default_value": DEFAULT_ISM_ORDER,
        "description": "Maximum image-source order for shoebox rooms.",
    },
    "max_time": {
        "type": "float",
        "default_value": DEFAULT_MAX_TIME,
        "description": "Length of the ray-traced energy histogram in seconds.",
    },
    "window_ms": {
        "type": "float",
        "default_value": DEFAULT_WINDOW * 1000.0,
        "description": "Moving-average window (and hop) of the level tracks in ms.",
    },
    "jnd_db": {
        "type": "float",
        "default_value": DEFAULT_JND_DB,
        "description": "Just-noticeable difference used for the verdicts.",
    },
    "gate_db": {
        "type": "float",
        "default_value": DEFAULT_GATE_DB,
        "description": "Frames quieter than max(L_v) minus this range are not analyzed.",
    },
    "emit": {
        "type": "list",
        "default_value": list(EMIT_KINDS),
        "description": "Artifact kinds to write: any of wav, csv, svg, json.",
    },
}
