"""Maximum-likelihood quantum state tomography with the EM + unitary (EMU) iteration."""

from .inversion import InversionReport, linear_invert
from .measurements import (
    MeasurementSet,
    Projector,
    frame_operator,
    pauli_measurement_set,
    polarization_ket,
    tensor,
    white_measurement_set,
)
from .metrics import compare_states, fidelity, trace_distance
from .simulation import SimulationSpec, misaligned_set, nominal_bell_state, sample_counts
from .solver import CountData, ReconstructionResult, SolverConfig, emu_iterate

__version__ = "0.1.0"

__all__ = [
    "CountData",
    "InversionReport",
    "MeasurementSet",
    "Projector",
    "ReconstructionResult",
    "SimulationSpec",
    "SolverConfig",
    "compare_states",
    "emu_iterate",
    "fidelity",
    "frame_operator",
    "linear_invert",
    "misaligned_set",
    "nominal_bell_state",
    "pauli_measurement_set",
    "polarization_ket",
    "sample_counts",
    "tensor",
    "trace_distance",
    "white_measurement_set",
]
