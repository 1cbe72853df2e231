"""Gate constructors and the standard-form circuits used by the solver.

A circuit in standard form is a single joint unitary acting on ``n_cr``
chronology-respecting qubits (leading positions) followed by ``n_ctc``
CTC-bound qubits (trailing positions).  The CTC qubits re-enter the
interaction region in whatever state makes the evolution self-consistent;
finding that state is the solver's job, not the circuit's.

Composition is written as matrix products, so in ``b @ a`` the gate ``a``
acts first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import (
    as_complex_matrix,
    check_unitary,
    kron,
    n_qubits_of,
    projector,
)

_SQ2 = np.sqrt(2.0)

_STANDARD_GATES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / _SQ2,
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
    # controlled-Hadamard, control on the leading qubit
    "CH": np.block(
        [
            [np.eye(2), np.zeros((2, 2))],
            [np.zeros((2, 2)), np.array([[1, 1], [1, -1]]) / _SQ2],
        ]
    ).astype(complex),
}


def standard_gate(name: str) -> np.ndarray:
    """Matrix of a named gate: one of I, X, H, SWAP, CH."""
    try:
        return _STANDARD_GATES[name].copy()
    except KeyError:
        valid = ", ".join(sorted(_STANDARD_GATES))
        raise ValueError(f"unknown gate {name!r}; valid names are: {valid}") from None


def controlled_on_pattern(
    controls: Sequence[int],
    pattern: str,
    target_gate,
    targets: Sequence[int],
    total: int,
) -> np.ndarray:
    """Unitary applying ``target_gate`` on ``targets`` exactly when the control
    qubits hold the given bit pattern, and the identity otherwise.

    ``controls`` may be empty (with an empty pattern), in which case the gate
    is simply embedded on its target wires.  ``targets`` is order-sensitive:
    the first listed wire is the gate's most significant qubit.
    """
    controls = [int(c) for c in controls]
    targets = [int(t) for t in targets]
    g = as_complex_matrix(target_gate)

    if len(pattern) != len(controls):
        raise ValueError(
            f"pattern {pattern!r} has {len(pattern)} bits for {len(controls)} controls"
        )
    if any(c not in "01" for c in pattern):
        raise ValueError(f"pattern {pattern!r} must consist of 0/1 characters")
    wires = controls + targets
    if len(set(wires)) != len(wires):
        raise ValueError(f"control wires {controls} and target wires {targets} overlap")
    if any(w < 0 or w >= total for w in wires):
        raise ValueError(f"wires {wires} out of range for {total} qubits")
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target wires in {targets}")
    k = len(targets)
    if g.shape != (2**k, 2**k):
        raise ValueError(f"gate shape {g.shape} does not match {k} target wires")

    dim = 2**total
    out = np.zeros((dim, dim), dtype=complex)
    # big-endian bit of wire w within a basis index
    shift = [total - 1 - w for w in wires]
    ctrl_shift, tgt_shift = shift[: len(controls)], shift[len(controls) :]
    want = [int(c) for c in pattern]

    for col in range(dim):
        if any((col >> s) & 1 != w for s, w in zip(ctrl_shift, want)):
            out[col, col] = 1.0
            continue
        tgt_in = 0
        for s in tgt_shift:
            tgt_in = (tgt_in << 1) | ((col >> s) & 1)
        base = col
        for s in tgt_shift:
            base &= ~(1 << s)
        for tgt_out in range(2**k):
            amp = g[tgt_out, tgt_in]
            if amp == 0:
                continue
            row = base
            for j, s in enumerate(tgt_shift):
                row |= ((tgt_out >> (k - 1 - j)) & 1) << s
            out[row, col] += amp
    return out


def embed_gate(gate, targets: Sequence[int], total: int) -> np.ndarray:
    """Embed a gate on the given wires of a ``total``-qubit register."""
    return controlled_on_pattern((), "", gate, targets, total)


def bhw_unitary(a: int, b: int) -> np.ndarray:
    """The two-qubit unitary U_ab of the four-state discrimination circuit.

    U_00 = SWAP, U_01 = X(x)X, U_10 = (XH)(x)I, U_11 = (X(x)H) SWAP, with the
    right factor of each composition acting first.
    """
    if a not in (0, 1) or b not in (0, 1):
        raise ValueError(f"bits must be 0 or 1, got a={a!r}, b={b!r}")
    X, H, I = standard_gate("X"), standard_gate("H"), standard_gate("I")
    swap = standard_gate("SWAP")
    if (a, b) == (0, 0):
        return swap
    if (a, b) == (0, 1):
        return kron(X, X)
    if (a, b) == (1, 0):
        return kron(X, I) @ kron(H, I)
    return kron(X, H) @ swap


@dataclass(frozen=True)
class CtcCircuit:
    """A standard-form circuit: CR qubit count, CTC qubit count, joint unitary.

    Instances are treated as immutable after construction and are safe to
    share between threads.
    """

    n_cr: int
    n_ctc: int
    unitary: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        if self.n_cr < 1:
            raise ValueError("a circuit needs at least one CR qubit")
        if self.n_ctc < 1:
            raise ValueError("a circuit needs at least one CTC qubit")
        u = check_unitary(self.unitary)
        if n_qubits_of(u.shape[0]) != self.n_qubits:
            raise ValueError(
                f"unitary acts on {n_qubits_of(u.shape[0])} qubits, "
                f"circuit declares {self.n_qubits}"
            )
        object.__setattr__(self, "unitary", u)

    @property
    def n_qubits(self) -> int:
        return self.n_cr + self.n_ctc

    @property
    def cr_dim(self) -> int:
        return 2**self.n_cr

    @property
    def ctc_dim(self) -> int:
        return 2**self.n_ctc


def bhw2_circuit() -> CtcCircuit:
    """Two-state discrimination circuit: SWAP, then controlled-Hadamard.

    One CR qubit (system A, the unknown input drawn from {|0>, |->}) and one
    CTC qubit (system B).  The self-consistent CTC state ends up encoding
    which of the two nonorthogonal inputs was supplied, and the final
    computational-basis measurement of A reads it out.
    """
    swap = embed_gate(standard_gate("SWAP"), (0, 1), 2)
    ch = embed_gate(standard_gate("CH"), (0, 1), 2)
    return CtcCircuit(n_cr=1, n_ctc=1, unitary=ch @ swap, label="bhw2")


def bhw4_circuit() -> CtcCircuit:
    """Four-state discrimination circuit for {|0>, |1>, |+>, |->}.

    CR register: the unknown qubit plus an ancilla prepared in |0>.  CTC
    register: two qubits.  The circuit swaps the registers and then applies
    U_ab on the CTC side, selected by the (former CTC) pattern now sitting
    on the CR wires.  Its consistency fixed points force the CR output onto
    one of the four basis strings, one per input state.
    """
    swaps = embed_gate(standard_gate("SWAP"), (0, 2), 4) @ embed_gate(
        standard_gate("SWAP"), (1, 3), 4
    )
    controlled = np.zeros((16, 16), dtype=complex)
    for a in (0, 1):
        for b in (0, 1):
            controlled += kron(projector(f"{a}{b}"), bhw_unitary(a, b))
    return CtcCircuit(n_cr=2, n_ctc=2, unitary=controlled @ swaps, label="bhw4")


def not_gate_circuit() -> CtcCircuit:
    """A NOT gate on a single CTC-bound qubit.

    The classical version has no consistent assignment at all (the bit must
    equal its own negation); the density-operator version does.  A spectator
    CR qubit carries the identity so that the circuit fits the uniform
    standard form.
    """
    u = kron(standard_gate("I"), standard_gate("X"))
    return CtcCircuit(n_cr=1, n_ctc=1, unitary=u, label="not-gate")


def identity_circuit(n_cr: int = 1, n_ctc: int = 1) -> CtcCircuit:
    """A do-nothing circuit; every CTC state is trivially consistent."""
    dim = 2 ** (n_cr + n_ctc)
    return CtcCircuit(
        n_cr=n_cr, n_ctc=n_ctc, unitary=np.eye(dim, dtype=complex), label="identity"
    )
