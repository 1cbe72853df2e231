"""Self-consistency of CTC-bound states as a fixed-point problem.

For a standard-form circuit with joint unitary U, CR input rho_in and CTC
state rho, one pass through the interaction region induces the channel

    L(rho) = Tr_CR[ U (rho_in (x) rho) U^dag ],

and consistency demands L(rho) = rho: the state entering the future mouth
must equal the state that already left the past mouth.  Because rho_in is a
parameter of L, the circuit's CR output

    rho_out = Tr_CTC[ U (rho_in (x) rho*) U^dag ]

is nonlinear in rho_in even though each individual L is linear and CPTP.

This module builds L as an explicit matrix on column-stacked operators,
computes its eigenvalue-1 subspace exactly, selects a canonical fixed point
by averaged iteration from the maximally mixed state, and evaluates the
output rule.  A CPTP map always has at least one fixed state, so the solve
succeeds for every circuit and every input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .gates import CtcCircuit
from .linalg import (
    DEFAULT_TOLERANCES,
    Tolerances,
    as_complex_matrix,
    check_density_operator,
    dagger,
    hermitian_eigensystem,
    kron,
    maximally_mixed,
    partial_trace,
    trace_distance,
)


class FixedPointConvergenceError(RuntimeError):
    """Raised when averaged iteration fails to reach tolerance.

    Carries the best iterate seen (``best``) and its residual (``residual``).
    """

    def __init__(self, message: str, best: np.ndarray, residual: float):
        super().__init__(message)
        self.best = best
        self.residual = residual


def vec(m: np.ndarray) -> np.ndarray:
    """Column-stack a matrix into a vector."""
    return np.asarray(m).T.reshape(-1)

def unvec(v: np.ndarray) -> np.ndarray:
    """Inverse of ``vec`` for square matrices."""
    v = np.asarray(v)
    d = int(round(np.sqrt(v.size)))
    return v.reshape(d, d).T


@dataclass(frozen=True)
class Superoperator:
    """A linear map on d x d operators, stored as a d^2 x d^2 matrix acting
    on column-stacked operators."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = as_complex_matrix(self.matrix)
        if m.shape != (self.dim**2, self.dim**2):
            raise ValueError(
                f"superoperator on dimension {self.dim} must be "
                f"{self.dim**2}x{self.dim**2}, got {m.shape}"
            )
        object.__setattr__(self, "matrix", m)

    def apply(self, rho) -> np.ndarray:
        return unvec(self.matrix @ vec(as_complex_matrix(rho)))

    def choi(self) -> np.ndarray:
        """Choi matrix sum_ij E_ij (x) L(E_ij); positive iff the map is CP."""
        d = self.dim
        c = np.zeros((d * d, d * d), dtype=complex)
        for i in range(d):
            for j in range(d):
                e = np.zeros((d, d), dtype=complex)
                e[i, j] = 1.0
                c += kron(e, self.apply(e))
        return c

    def validate(self, tolerances: Tolerances = DEFAULT_TOLERANCES) -> None:
        """Check trace preservation and complete positivity."""
        d = self.dim
        # Tr(L(rho)) = Tr(rho) for all rho  <=>  vec(I)^dag S = vec(I)^dag
        row = vec(np.eye(d)).conj() @ self.matrix - vec(np.eye(d)).conj()
        worst = float(np.max(np.abs(row)))
        if worst > tolerances.validity:
            raise ValueError(f"map is not trace preserving: defect {worst:.3e}")
        w, _ = hermitian_eigensystem(self.choi())
        if w[0] < -tolerances.choi_psd:
            raise ValueError(
                f"map is not completely positive: Choi min eigenvalue {w[0]:.3e}"
            )


@dataclass
class FixedPointResult:
    """Outcome of a fixed-point computation.

    ``basis`` spans the eigenvalue-1 operator subspace (Hermitian,
    orthonormal in the Hilbert-Schmidt inner product); it is ``None`` when
    only an iterative solve was performed.  ``selected`` is the canonical
    fixed state, ``residual`` its trace distance from its own image, and
    ``unique`` records whether the subspace is one-dimensional.
    ``rank_ambiguous`` flags singular values within a factor of 10 of the
    rank cutoff; the computation then proceeds with the smaller rank.
    """

    basis: list[np.ndarray] | None
    selected: np.ndarray | None
    unique: bool | None
    residual: float
    iterations_used: int | None = None
    rank_ambiguous: bool = False


@dataclass(frozen=True)
class ClassicalFixedPoints:
    """Fixed points and cycle decomposition of a classical transition map."""

    fixed_points: list[int]
    cycles: list[list[int]]
    n_states: int


def _reduce_cr_input(
    circuit: CtcCircuit, cr_input, cr_qubits: Sequence[int] | None
) -> np.ndarray:
    """Reduce an (optionally extended) CR input to the circuit's local factor.

    The consistency condition only ever sees the reduced state of the CR
    system, so correlations with qubits outside the interaction region are
    discarded here; this is also why any such entanglement is broken once
    the CTC state is forced to be self-consistent.  By default an oversized
    input is taken to carry the circuit's CR qubits first and ancillas last;
    ``cr_qubits`` overrides that placement.
    """
    rho = check_density_operator(cr_input)
    if rho.shape[0] == circuit.cr_dim and cr_qubits is None:
        return rho
    total_dim = rho.shape[0]
    n_total = total_dim.bit_length() - 1
    if 2**n_total != total_dim or total_dim < circuit.cr_dim:
        raise ValueError(
            f"CR input has dimension {total_dim}, expected {circuit.cr_dim} "
            f"(or a power-of-2 extension of it)"
        )
    if cr_qubits is None:
        cr_qubits = tuple(range(circuit.n_cr))
    cr_qubits = tuple(int(q) for q in cr_qubits)
    if len(cr_qubits) != circuit.n_cr:
        raise ValueError(
            f"cr_qubits {cr_qubits} must name exactly {circuit.n_cr} qubits"
        )
    return partial_trace(rho, [2] * n_total, keep=cr_qubits)


def superoperator_from_map(fn: Callable[[np.ndarray], np.ndarray], dim: int) -> Superoperator:
    """Assemble the matrix of a linear operator map by probing matrix units."""
    cols = []
    for j in range(dim * dim):
        e = np.zeros(dim * dim, dtype=complex)
        e[j] = 1.0
        cols.append(vec(fn(unvec(e))))
    return Superoperator(dim=dim, matrix=np.column_stack(cols))


def ctc_channel(
    circuit: CtcCircuit,
    cr_input,
    cr_qubits: Sequence[int] | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Superoperator:
    """The map rho -> Tr_CR[U (rho_in (x) rho) U^dag] as a superoperator.

    Built in Kraus form: with rho_in = sum_m q_m |chi_m><chi_m|, the Kraus
    operators are A_km = sqrt(q_m) (<k| (x) I) U (|chi_m> (x) I) over the CR
    basis bras <k|, giving S = sum conj(A) (x) A in the column-stacking
    convention.
    """
    rho_cr = _reduce_cr_input(circuit, cr_input, cr_qubits)
    d_cr, d_ctc = circuit.cr_dim, circuit.ctc_dim
    u4 = circuit.unitary.reshape(d_cr, d_ctc, d_cr, d_ctc)

    q, chi = hermitian_eigensystem(rho_cr)
    s = np.zeros((d_ctc**2, d_ctc**2), dtype=complex)
    for m in range(d_cr):
        if q[m] < tolerances.entropy_floor:
            continue
        # all CR bras at once: A[k] = <k| U |chi_m> acting on the CTC factor
        a_all = np.einsum("krms,m->krs", u4, chi[:, m])
        for k in range(d_cr):
            a = np.sqrt(q[m]) * a_all[k]
            s += np.kron(a.conj(), a)
    channel = Superoperator(dim=d_ctc, matrix=s)
    channel.validate(tolerances)
    return channel


def _hermitian_basis(mats: list[np.ndarray], cutoff: float) -> list[np.ndarray]:
    """Orthonormal Hermitian basis of the span of a dagger-closed family."""
    d = mats[0].shape[0]
    cands = []
    for m in mats:
        cands.append((m + dagger(m)) / 2.0)
        cands.append((m - dagger(m)) / 2.0j)
    rows = np.array(
        [np.concatenate([c.real.reshape(-1), c.imag.reshape(-1)]) for c in cands]
    )
    _, sv, vt = np.linalg.svd(rows, full_matrices=False)
    rank = int(np.sum(sv > cutoff * max(1.0, sv[0])))
    basis = []
    for i in range(rank):
        re, im = vt[i, : d * d], vt[i, d * d :]
        b = (re + 1j * im).reshape(d, d)
        b = (b + dagger(b)) / 2.0
        b /= np.sqrt(np.trace(b @ b).real)
        # deterministic sign: make the trace (or first significant diagonal
        # entry) nonnegative
        tr = float(np.trace(b).real)
        if abs(tr) > cutoff:
            b = b if tr > 0 else -b
        else:
            diag = np.diag(b).real
            idx = np.argmax(np.abs(diag))
            if abs(diag[idx]) > cutoff and diag[idx] < 0:
                b = -b
        basis.append(b)
    return basis


def fixed_point_space(
    channel: Superoperator, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> FixedPointResult:
    """Exact eigenvalue-1 subspace of a channel, as a Hermitian basis.

    A trace-preserving completely positive map always has at least one fixed
    state, so the returned basis is never empty for a valid channel.  No
    canonical fixed point is selected here (``selected`` is ``None``).
    """
    channel.validate(tolerances)
    d = channel.dim
    k = channel.matrix - np.eye(d * d)
    _, sv, vt = np.linalg.svd(k)
    cutoff = tolerances.rank_cutoff
    null_mask = sv < cutoff
    ambiguous = bool(np.any((sv >= cutoff) & (sv < 10.0 * cutoff)))
    if not np.any(null_mask):
        raise ValueError(
            "no fixed point found (smallest singular value "
            f"{sv[-1]:.3e}); the input is not a valid channel"
        )
    mats = [unvec(vt[i].conj()) for i in np.nonzero(null_mask)[0]]
    basis = _hermitian_basis(mats, cutoff)
    residual = max(trace_distance(channel.apply(b), b) for b in basis)
    return FixedPointResult(
        basis=basis,
        selected=None,
        unique=(len(basis) == 1),
        residual=residual,
        iterations_used=None,
        rank_ambiguous=ambiguous,
    )


def _residual_if_close(state: np.ndarray, image: np.ndarray, tol: float) -> float | None:
    """Exact residual trace_distance(state, image), or None when a cheap
    Hilbert-Schmidt bound already shows it exceeds ``tol``."""
    if 0.5 * float(np.linalg.norm(image - state)) > tol:
        return None  # ||D||_1 >= ||D||_2, so the residual is above tol
    return trace_distance(state, image)


def iterate_fixed_point(
    channel: Superoperator,
    start,
    tol: float = DEFAULT_TOLERANCES.convergence,
    max_iters: int = 100_000,
    block: int = 64,
) -> FixedPointResult:
    """Averaged fixed-point iteration from ``start``.

    Runs the channel repeatedly while keeping a running (Cesaro) average of
    the iterates; the average damps oscillatory spectral components and is
    adopted as the new base point every ``block`` steps, so the scheme
    converges geometrically instead of at the 1/N rate of one uninterrupted
    average.  Returns the first point, raw iterate or running average, whose
    trace distance from its own image drops to ``tol``; ``iterations_used``
    counts the channel applications that advanced the iterate.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    sigma = check_density_operator(start)
    image = channel.apply(sigma)
    res = _residual_if_close(sigma, image, tol)
    if res is not None and res <= tol:
        return FixedPointResult(
            basis=None, selected=sigma, unique=None, residual=res,
            iterations_used=0,
        )
    best, best_hs = sigma, float(np.linalg.norm(image - sigma))
    total = 0
    base = sigma
    while total < max_iters:
        acc = base.copy()
        x = base
        count = 1
        for _ in range(block):
            if total >= max_iters:
                break
            x_next = channel.apply(x)
            total += 1
            hs = float(np.linalg.norm(x_next - x))
            if hs < best_hs:
                best, best_hs = x, hs
            res = _residual_if_close(x, x_next, tol)
            if res is not None and res <= tol:
                return FixedPointResult(
                    basis=None, selected=x, unique=None, residual=res,
                    iterations_used=total,
                )
            x = x_next
            acc += x
            count += 1
            sigma = acc / count
            sig_image = channel.apply(sigma)
            hs = float(np.linalg.norm(sig_image - sigma))
            if hs < best_hs:
                best, best_hs = sigma, hs
            res = _residual_if_close(sigma, sig_image, tol)
            if res is not None and res <= tol:
                return FixedPointResult(
                    basis=None, selected=sigma, unique=None, residual=res,
                    iterations_used=total,
                )
        base = sigma
    best_res = trace_distance(best, channel.apply(best))
    raise FixedPointConvergenceError(
        f"no fixed point within {max_iters} iterations "
        f"(best residual {best_res:.3e} > tol {tol:.1e})",
        best=best,
        residual=best_res,
    )


def _project_to_span(sigma: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    """Project onto the span of an orthonormal Hermitian basis, then repair
    the result into a valid state (clip negative eigenvalues, renormalize)."""
    p = np.zeros_like(sigma)
    for b in basis:
        p += float(np.trace(b @ sigma).real) * b
    p = (p + dagger(p)) / 2.0
    w, v = hermitian_eigensystem(p)
    w = np.clip(w, 0.0, None)
    tr = float(np.sum(w))
    if tr <= 0.0:
        raise ValueError("projection onto the fixed-point span has no positive part")
    p = (v * (w / tr)) @ dagger(v)
    return (p + dagger(p)) / 2.0


def solve(
    circuit: CtcCircuit,
    cr_input,
    cr_qubits: Sequence[int] | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    max_iters: int = 100_000,
) -> FixedPointResult:
    """Full consistency solve: exact subspace plus a canonical fixed state.

    The canonical state is the averaged iteration started from the maximally
    mixed CTC state, projected into the exact fixed-point subspace.  When the
    subspace is one-dimensional the exact and iterative answers are compared
    and must agree to 1e-8 in trace distance.
    """
    channel = ctc_channel(circuit, cr_input, cr_qubits, tolerances)
    space = fixed_point_space(channel, tolerances)
    iterated = iterate_fixed_point(
        channel, maximally_mixed(channel.dim), tol=tolerances.convergence,
        max_iters=max_iters,
    )
    selected = _project_to_span(iterated.selected, space.basis)
    check_density_operator(selected, tolerances.validity)
    residual = trace_distance(selected, channel.apply(selected))
    if space.unique:
        exact = _project_to_span(maximally_mixed(channel.dim), space.basis)
        gap = trace_distance(selected, exact)
        if gap > 1e-8:
            raise FixedPointConvergenceError(
                f"exact and iterative fixed points disagree by {gap:.3e} "
                "although the fixed point is unique",
                best=selected,
                residual=residual,
            )
    return FixedPointResult(
        basis=space.basis,
        selected=selected,
        unique=space.unique,
        residual=residual,
        iterations_used=iterated.iterations_used,
        rank_ambiguous=space.rank_ambiguous,
    )


def cr_output(
    circuit: CtcCircuit,
    cr_input,
    cr_qubits: Sequence[int] | None = None,
    result: FixedPointResult | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Final CR state Tr_CTC[U (rho_in (x) rho*) U^dag] at the canonical
    fixed point rho*; pass ``result`` to reuse an existing solve."""
    rho_cr = _reduce_cr_input(circuit, cr_input, cr_qubits)
    if result is None:
        result = solve(circuit, rho_cr, tolerances=tolerances)
    joint = circuit.unitary @ kron(rho_cr, result.selected) @ dagger(circuit.unitary)
    out = partial_trace(
        joint, [2] * circuit.n_qubits, keep=range(circuit.n_cr)
    )
    return check_density_operator(out, tolerances.validity)


def nonlinearity_defect(
    circuit: CtcCircuit, rho1, rho2, lam: float,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """How far the output rule is from acting affinely on a mixture.

    Returns trace_distance(out(lam rho1 + (1-lam) rho2),
    lam out(rho1) + (1-lam) out(rho2)); zero for every ordinary (linear)
    channel, and generically positive here because the consistency condition
    makes the output depend nonlinearly on the input.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    a = check_density_operator(rho1)
    b = check_density_operator(rho2)
    if a.shape != b.shape:
        raise ValueError(f"input dimensions differ: {a.shape} vs {b.shape}")
    mixed = lam * a + (1.0 - lam) * b
    out_mixed = cr_output(circuit, mixed, tolerances=tolerances)
    out_parts = lam * cr_output(circuit, a, tolerances=tolerances) + (
        1.0 - lam
    ) * cr_output(circuit, b, tolerances=tolerances)
    return trace_distance(out_mixed, out_parts)


def classical_fixed_points(
    transition: Callable[[int], int] | Sequence[int],
    n_states: int | None = None,
) -> ClassicalFixedPoints:
    """Fixed points and cycles of a transition map on {0, ..., n_states - 1}.

    Exhaustive scan; ``transition`` may be a callable (then ``n_states`` is
    required) or a lookup table.  Cycles are reported rotated to start at
    their smallest element, in increasing order of that element; fixed
    points appear as 1-cycles.
    """
    if callable(transition):
        if n_states is None:
            raise ValueError("n_states is required when transition is callable")
        table = [int(transition(s)) for s in range(n_states)]
    else:
        table = [int(v) for v in transition]
        if n_states is not None and n_states != len(table):
            raise ValueError(
                f"n_states={n_states} does not match table of length {len(table)}"
            )
    n = len(table)
    for s, v in enumerate(table):
        if not 0 <= v < n:
            raise ValueError(f"transition({s}) = {v} is outside 0..{n - 1}")

    fixed = [s for s in range(n) if table[s] == s]
    seen = [0] * n  # 0 unseen, 1 on current path, 2 finished
    cycles: list[list[int]] = []
    for s0 in range(n):
        if seen[s0]:
            continue
        path: list[int] = []
        pos: dict[int, int] = {}
        s = s0
        while seen[s] == 0:
            pos[s] = len(path)
            path.append(s)
            seen[s] = 1
            s = table[s]
            if s in pos:
                cyc = path[pos[s]:]
                m = cyc.index(min(cyc))
                cycles.append(cyc[m:] + cyc[:m])
                break
        for p in path:
            seen[p] = 2
    cycles.sort(key=lambda c: c[0])
    return ClassicalFixedPoints(fixed_points=fixed, cycles=cycles, n_states=n)
