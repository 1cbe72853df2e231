"""Dense complex-matrix kernel for small multi-qubit density-operator work.

Conventions shared by the whole package:

* qubits are big-endian: qubit 0 is the most significant bit of a basis
  index, so ``kron(a, b)`` places ``a`` on the leading qubits;
* chronology-respecting (CR) qubits occupy the leading positions and
  CTC-bound qubits the trailing positions of every joint state;
* matrices are plain complex128 ``numpy.ndarray`` objects.  "Density
  operator", "pure state" and "unitary" are contracts enforced by the
  ``check_*`` helpers, not wrapper classes;
* everything in scope is at most four qubits, so dense LAPACK routines
  (``eigh``, ``svd``) are adequate throughout.

All functions are pure and never mutate their arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds used across the package."""

    validity: float = 1e-10       # Hermiticity / trace / positivity slack for states
    convergence: float = 1e-12    # fixed-point iteration target
    rank_cutoff: float = 1e-9     # singular values below this count as zero
    choi_psd: float = 1e-9        # allowed negativity of a Choi matrix
    entropy_floor: float = 1e-12  # eigenvalues below this are dropped from entropy


DEFAULT_TOLERANCES = Tolerances()

_KET_CHARS = {
    "0": np.array([1.0, 0.0], dtype=complex),
    "1": np.array([0.0, 1.0], dtype=complex),
    "+": np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0),
    "-": np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0),
}


def as_complex_matrix(m) -> np.ndarray:
    """Coerce to a 2-D complex128 array, rejecting NaN/Inf entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(m).conj().T


def kron(a, b) -> np.ndarray:
    """Tensor product with ``a`` on the leading (most significant) qubits."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def kron_all(*factors) -> np.ndarray:
    """Left-to-right tensor product of any number of factors."""
    if not factors:
        raise ValueError("kron_all needs at least one factor")
    return reduce(np.kron, (as_complex_matrix(f) for f in factors))


def ket(label: str) -> np.ndarray:
    """State vector for a product of |0>, |1>, |+>, |-> factors, e.g. ``"+0"``.

    |+> and |-> are (|0> +/- |1>)/sqrt(2).
    """
    if not label:
        raise ValueError("ket label must contain at least one character")
    bad = [c for c in label if c not in _KET_CHARS]
    if bad:
        raise ValueError(
            f"unknown ket factor(s) {bad!r}; valid characters are 0, 1, +, -"
        )
    return reduce(np.kron, (_KET_CHARS[c] for c in label))


def projector(state) -> np.ndarray:
    """Rank-one projector |psi><psi| from a vector or a ``ket`` label."""
    psi = ket(state) if isinstance(state, str) else np.asarray(state, dtype=complex)
    if psi.ndim != 1:
        raise ValueError("projector expects a state vector or ket label")
    return np.outer(psi, psi.conj())


def maximally_mixed(dim: int) -> np.ndarray:
    """The state I/dim."""
    return np.eye(dim, dtype=complex) / dim


def n_qubits_of(dim: int) -> int:
    """Number of qubits for a Hilbert-space dimension, rejecting non-powers of 2."""
    n = int(dim).bit_length() - 1
    if dim <= 0 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of 2")
    return n


def basis_labels(n_qubits: int) -> tuple[str, ...]:
    """Big-endian computational-basis bitstrings for ``n_qubits`` qubits."""
    return tuple(format(i, f"0{n_qubits}b") for i in range(2**n_qubits))


def partial_trace(m, subsystem_dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``subsystem_dims`` lists the dimension of each tensor factor in order;
    the result acts on the kept factors in their original relative order.
    """
    a = as_complex_matrix(m)
    dims = [int(d) for d in subsystem_dims]
    total = int(np.prod(dims))
    if a.shape != (total, total):
        raise ValueError(
            f"matrix is {a.shape[0]}x{a.shape[1]} but subsystem dims {dims} "
            f"require {total}x{total}"
        )
    kept = sorted({int(k) for k in keep})
    if not kept:
        raise ValueError("must keep at least one subsystem")
    if kept[0] < 0 or kept[-1] >= len(dims):
        raise ValueError(f"keep indices {kept} out of range for {len(dims)} subsystems")

    n = len(dims)
    t = a.reshape(dims + dims)
    traced = [i for i in range(n) if i not in kept]
    for offset, i in enumerate(traced):
        # each earlier trace removed one row axis and one col axis
        ax = i - offset
        t = np.trace(t, axis1=ax, axis2=ax + (n - offset))
    d_keep = int(np.prod([dims[i] for i in kept]))
    return t.reshape(d_keep, d_keep)


def hermitian_eigensystem(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors of the Hermitian part of ``m``."""
    a = as_complex_matrix(m)
    return np.linalg.eigh((a + dagger(a)) / 2.0)


def trace_distance(rho, sigma) -> float:
    """(1/2) * sum |eig(rho - sigma)| for equal-dimension Hermitian operators."""
    a = as_complex_matrix(rho)
    b = as_complex_matrix(sigma)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    w, _ = hermitian_eigensystem(a - b)
    return 0.5 * float(np.sum(np.abs(w)))


def von_neumann_entropy(rho, floor: float | None = None) -> float:
    """Entropy -sum(p * log2 p) in bits over eigenvalues above ``floor``."""
    if floor is None:
        floor = DEFAULT_TOLERANCES.entropy_floor
    w, _ = hermitian_eigensystem(rho)
    w = w[w > floor]
    return float(-np.sum(w * np.log2(w)))


def check_density_operator(rho, tol: float | None = None) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return the array."""
    if tol is None:
        tol = DEFAULT_TOLERANCES.validity
    a = as_complex_matrix(rho)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"density operator must be square, got {a.shape}")
    n_qubits_of(a.shape[0])
    herm = np.max(np.abs(a - dagger(a)))
    if herm > tol:
        raise ValueError(f"not Hermitian: max |M - M^dag| = {herm:.3e} > {tol:.1e}")
    tr = complex(np.trace(a))
    if abs(tr - 1.0) > tol:
        raise ValueError(f"trace is {tr:.12g}, not 1 within {tol:.1e}")
    w, _ = hermitian_eigensystem(a)
    if w[0] < -tol:
        raise ValueError(f"not positive semidefinite: min eigenvalue {w[0]:.3e}")
    return a


def check_unitary(u, tol: float | None = None) -> np.ndarray:
    """Validate U^dag U = I within ``tol``; return the array."""
    if tol is None:
        tol = DEFAULT_TOLERANCES.validity
    a = as_complex_matrix(u)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"unitary must be square, got {a.shape}")
    defect = np.max(np.abs(dagger(a) @ a - np.eye(a.shape[0])))
    if defect > tol:
        raise ValueError(f"not unitary: max |U^dag U - I| = {defect:.3e} > {tol:.1e}")
    return a


def check_pure_state(psi, tol: float | None = None) -> np.ndarray:
    """Validate unit norm of a state vector; return the array."""
    if tol is None:
        tol = DEFAULT_TOLERANCES.validity
    a = np.asarray(psi, dtype=complex)
    if a.ndim != 1:
        raise ValueError(f"pure state must be a vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("state vector contains non-finite entries")
    norm = float(np.vdot(a, a).real)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"state norm^2 is {norm:.12g}, not 1 within {tol:.1e}")
    return a
