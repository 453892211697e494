# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

from sgtk import TankError


class AuralabError(TankError):
    """Base class for every error raised by auralab."""


class SceneError(AuralabError):
    """
    Raised for unknown presets, malformed scene files and scenes that cannot
    be used by a computation.
    """


class GeometryError(AuralabError):
    """Raised when a geometric operation receives geometry it cannot handle."""


class ReverberationUndefinedError(AuralabError):
    """Raised when a reverberation time is requested for a room without absorption."""


class OpenMeshError(AuralabError):
    """
    Raised when a ray leaves the room through a gap in the geometry.

    :param position: The point where the ray escaped.
    :type position: tuple
    """

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class NyquistError(AuralabError):
    """Raised when the sample rate cannot represent the highest octave band."""


class SampleRateMismatchError(AuralabError):
    """Raised when two signals or responses with different sample rates are combined."""


class SignalError(AuralabError):
    """Raised for empty signals or level tracks of mismatched shape."""


class WavError(AuralabError):
    """Base class for WAV input/output errors."""


class MissingWavError(WavError):
    """Raised when the WAV file does not exist."""


class MalformedWavError(WavError):
    """Raised when the RIFF structure of a WAV file cannot be parsed."""


class UnsupportedEncodingError(WavError):
    """Raised for WAV encodings other than 16-bit PCM and 32-bit float."""


class WavPreconditionError(WavError):
    """Raised when a signal cannot be written (non-finite samples, bad layout)."""


class WavWriteError(WavError):
    """Raised when the destination of a WAV file is not writable."""


class ConfigError(AuralabError):
    """Raised when a run configuration is invalid."""


class StageError(AuralabError):
    """
    Raised by the pipeline when one of its stages fails.

    :param stage: Name of the failing stage.
    :type stage: str
    :param cause: The original error.
    :type cause: Exception
    """

    def __init__(self, stage, cause):
        super().__init__("%s: %s" % (stage, cause))
        self.stage = stage
        self.cause = cause
