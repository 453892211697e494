# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

import pytest
import sgtk

from auralab.decorators import stage
from auralab.errors import (
    AuralabError,
    MissingWavError,
    OpenMeshError,
    SceneError,
    StageError,
    WavError,
)


@stage("simulate")
def _fails(error):
    raise error


@stage("simulate")
def _succeeds(value):
    return value * 2


def test_passes_result_through():
    assert _succeeds(21) == 42
    assert _succeeds.__name__ == "_succeeds"


def test_wraps_domain_errors():
    cause = SceneError("unknown preset 'hall9'")
    with pytest.raises(StageError) as error:
        _fails(cause)
    assert error.value.stage == "simulate"
    assert error.value.cause is cause
    assert str(error.value) == "simulate: unknown preset 'hall9'"


def test_keeps_the_innermost_stage():
    @stage("pipeline")
    def outer():
        _fails(SceneError("broken"))

    with pytest.raises(StageError) as error:
        outer()
    assert error.value.stage == "simulate"


def test_other_errors_pass_unchanged():
    with pytest.raises(ValueError):
        _fails(ValueError("not ours"))


def test_hierarchy():
    assert issubclass(AuralabError, sgtk.TankError)
    assert issubclass(MissingWavError, WavError)
    error = OpenMeshError("ray escaped", position=(1.0, 2.0, 3.0))
    assert error.position == (1.0, 2.0, 3.0)
    assert isinstance(StageError("auralize", error), AuralabError)
