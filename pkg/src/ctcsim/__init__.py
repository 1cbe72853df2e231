"""Simulator and solver for quantum circuits with CTC-bound qubits.

The package computes the self-consistent density operator a closed-loop
qubit must carry, the resulting (nonlinear) circuit output, the
nonorthogonal-state discrimination experiments built on that effect, and
the singlet signaling protocol with its frame-consistency analysis.
"""

from .gates import (
    CtcCircuit,
    bhw2_circuit,
    bhw4_circuit,
    bhw_unitary,
    controlled_on_pattern,
    embed_gate,
    identity_circuit,
    not_gate_circuit,
    standard_gate,
)
from .linalg import (
    DEFAULT_TOLERANCES,
    Tolerances,
    basis_labels,
    check_density_operator,
    check_pure_state,
    check_unitary,
    ket,
    kron,
    maximally_mixed,
    partial_trace,
    projector,
    trace_distance,
    von_neumann_entropy,
)
from .scenarios import (
    OutcomeDistribution,
    ScenarioReport,
    measure_computational,
    run_bhw2,
    run_bhw4,
    run_not_gate,
)
from .signaling import (
    SignalingReport,
    SignalingTrial,
    alice_measure,
    bob_discriminate,
    bub_stairs_check,
    exact_frame_tables,
    make_singlet,
    run_protocol,
)
from .solver import (
    ClassicalFixedPoints,
    FixedPointConvergenceError,
    FixedPointResult,
    Superoperator,
    classical_fixed_points,
    cr_output,
    ctc_channel,
    fixed_point_space,
    iterate_fixed_point,
    nonlinearity_defect,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "CtcCircuit",
    "ClassicalFixedPoints",
    "DEFAULT_TOLERANCES",
    "FixedPointConvergenceError",
    "FixedPointResult",
    "OutcomeDistribution",
    "ScenarioReport",
    "SignalingReport",
    "SignalingTrial",
    "Superoperator",
    "Tolerances",
    "alice_measure",
    "basis_labels",
    "bhw2_circuit",
    "bhw4_circuit",
    "bhw_unitary",
    "bob_discriminate",
    "bub_stairs_check",
    "check_density_operator",
    "check_pure_state",
    "check_unitary",
    "classical_fixed_points",
    "controlled_on_pattern",
    "cr_output",
    "ctc_channel",
    "embed_gate",
    "exact_frame_tables",
    "fixed_point_space",
    "identity_circuit",
    "iterate_fixed_point",
    "ket",
    "kron",
    "make_singlet",
    "maximally_mixed",
    "measure_computational",
    "nonlinearity_defect",
    "not_gate_circuit",
    "partial_trace",
    "projector",
    "run_bhw2",
    "run_bhw4",
    "run_not_gate",
    "run_protocol",
    "solve",
    "standard_gate",
    "trace_distance",
    "von_neumann_entropy",
]
