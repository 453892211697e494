# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

from .item import LabCondition
from .manager import SimulationManager
