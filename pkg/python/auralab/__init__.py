# Copyright (c) 2026 The auralab developers.
#
# This work is provided "AS IS". Use, copying and modification are subject to
# the terms distributed with this package.

"""
Room-acoustics simulation and laboratory validation: binaural virtual-stage and
residual-room impulse responses, auralization and level-difference analysis.
"""

__version__ = "0.1.0"
