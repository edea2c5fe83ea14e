# Copyright (c) 2025 tensor-ccs developers
#
# BSD 3-Clause License

"""Solvers package - completion algorithms for t-CCS observations."""

from tensor_ccs.solvers.iht import iht_complete
from tensor_ccs.solvers.itcurtc import (
    ItcurtcState,
    ObservedBlocks,
    WorkCounter,
    itcurtc,
    itcurtc_step,
    stopping_e,
)
from tensor_ccs.solvers.tstc import Subsolver, tstc, tstc_residual

__all__ = [
    "ItcurtcState",
    "ObservedBlocks",
    "WorkCounter",
    "itcurtc",
    "itcurtc_step",
    "stopping_e",
    "Subsolver",
    "tstc",
    "tstc_residual",
    "iht_complete",
]
