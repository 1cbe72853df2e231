"""Canned end-to-end experiments on the standard circuits.

Each scenario solves the consistency condition for a fixed CR input,
evaluates the circuit output, measures it in the computational basis and
bundles everything into a report.  The two discrimination scenarios are the
interesting ones: their four nonorthogonal inputs come out as four distinct
deterministic bitstrings, which no ordinary quantum channel can do.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .gates import CtcCircuit, bhw2_circuit, bhw4_circuit, not_gate_circuit
from .linalg import (
    basis_labels,
    check_density_operator,
    kron,
    n_qubits_of,
    partial_trace,
    projector,
)
from .linalg import DEFAULT_TOLERANCES, Tolerances
from .solver import (
    ClassicalFixedPoints,
    FixedPointResult,
    classical_fixed_points,
    cr_output,
    solve,
)

BHW2_INPUTS = {"zero": "0", "minus": "-"}
BHW4_INPUTS = {"zero": "0", "one": "1", "plus": "+", "minus": "-"}


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities of computational-basis outcomes, keyed by bitstring."""

    labels: tuple[str, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.probabilities):
            raise ValueError("labels and probabilities differ in length")
        if any(p < -1e-9 or p > 1.0 + 1e-9 for p in self.probabilities):
            raise ValueError(f"probabilities out of range: {self.probabilities}")
        total = sum(self.probabilities)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    def probability(self, label: str) -> float:
        try:
            return self.probabilities[self.labels.index(label)]
        except ValueError:
            raise KeyError(f"no outcome labelled {label!r}") from None

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.labels, self.probabilities))


@dataclass
class ScenarioReport:
    """Everything one scenario run produced."""

    scenario: str
    circuit_label: str
    cr_input_label: str
    fixed_point: FixedPointResult
    output_state: np.ndarray
    distribution: OutcomeDistribution
    classical: ClassicalFixedPoints | None = None


def measure_computational(rho, qubits: Iterable[int]) -> OutcomeDistribution:
    """Born-rule outcome distribution for measuring a subset of qubits.

    Probabilities are the diagonal of the reduced state on the measured
    qubits; labels are big-endian bitstrings over those qubits in their
    original order.
    """
    rho = check_density_operator(rho)
    n = n_qubits_of(rho.shape[0])
    qubits = sorted({int(q) for q in qubits})
    if not qubits:
        raise ValueError("must measure at least one qubit")
    if qubits[0] < 0 or qubits[-1] >= n:
        raise ValueError(f"qubit indices {qubits} out of range for {n} qubits")
    reduced = rho if len(qubits) == n else partial_trace(rho, [2] * n, keep=qubits)
    probs = np.diag(reduced).real
    probs = np.where(np.abs(probs) < 1e-12, 0.0, probs)  # clip Born noise at zero
    return OutcomeDistribution(
        labels=basis_labels(len(qubits)),
        probabilities=tuple(float(p) for p in probs),
    )


def _run_discrimination(
    scenario: str,
    circuit: CtcCircuit,
    psi_char: str,
    ancilla: str | None,
    tolerances: Tolerances,
) -> ScenarioReport:
    label = f"|{psi_char}>" if ancilla is None else f"|{psi_char}> (x) |{ancilla}>"
    cr_input = projector(psi_char)
    if ancilla is not None:
        cr_input = kron(cr_input, projector(ancilla))
    result = solve(circuit, cr_input, tolerances=tolerances)
    output = cr_output(circuit, cr_input, result=result, tolerances=tolerances)
    distribution = measure_computational(output, range(circuit.n_cr))
    return ScenarioReport(
        scenario=scenario,
        circuit_label=circuit.label,
        cr_input_label=label,
        fixed_point=result,
        output_state=output,
        distribution=distribution,
    )


def run_not_gate(tolerances: Tolerances = DEFAULT_TOLERANCES) -> ScenarioReport:
    """The NOT-on-a-CTC experiment, classical and quantum side by side.

    The classical bit has no consistent assignment (one bare 2-cycle); the
    quantum qubit settles on the maximally mixed state.
    """
    circuit = not_gate_circuit()
    cr_input = projector("0")  # spectator qubit; any input gives the same channel
    result = solve(circuit, cr_input, tolerances=tolerances)
    output = cr_output(circuit, cr_input, result=result, tolerances=tolerances)
    distribution = measure_computational(output, range(circuit.n_cr))
    classical = classical_fixed_points([1, 0])
    return ScenarioReport(
        scenario="not-gate",
        circuit_label=circuit.label,
        cr_input_label="|0> (spectator)",
        fixed_point=result,
        output_state=output,
        distribution=distribution,
        classical=classical,
    )


def run_bhw2(
    input_name: str, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> ScenarioReport:
    """Two-state discrimination: ``zero`` or ``minus`` in, one definite bit out."""
    try:
        psi = BHW2_INPUTS[input_name]
    except KeyError:
        valid = ", ".join(sorted(BHW2_INPUTS))
        raise ValueError(f"unknown input {input_name!r}; choose one of: {valid}") from None
    return _run_discrimination("bhw2", bhw2_circuit(), psi, None, tolerances)


def run_bhw4(
    input_name: str, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> ScenarioReport:
    """Four-state discrimination over {zero, one, plus, minus}.

    The ancilla CR qubit starts in |0>; the two output bits identify the
    input state exactly.
    """
    try:
        psi = BHW4_INPUTS[input_name]
    except KeyError:
        valid = ", ".join(sorted(BHW4_INPUTS))
        raise ValueError(f"unknown input {input_name!r}; choose one of: {valid}") from None
    return _run_discrimination("bhw4", bhw4_circuit(), psi, "0", tolerances)
