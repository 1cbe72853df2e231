"""Command-line front end.

Subcommands:

* ``scenario {not-gate | bhw2 | bhw4}`` runs one canned experiment;
* ``signal`` runs the singlet signaling protocol with frame analysis;
* ``fixed-point --circuit FILE`` solves the consistency condition for a
  circuit described in a JSON document.

Reports go to stdout, either human readable (``--format text``) or as a
single JSON document (``--format machine``) whose numbers carry 12
significant digits; identical invocations with identical seeds produce
byte-identical machine output.  Diagnostics go to stderr.  Exit status is
0 on success, 1 when the solver fails to converge, 2 on usage or input
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from .gates import CtcCircuit, controlled_on_pattern, standard_gate
from .linalg import Tolerances, maximally_mixed, projector
from .scenarios import (
    BHW2_INPUTS,
    BHW4_INPUTS,
    OutcomeDistribution,
    ScenarioReport,
    measure_computational,
    run_bhw2,
    run_bhw4,
    run_not_gate,
)
from .signaling import (
    AXIS_LABEL,
    SignalingReport,
    bub_stairs_check,
    exact_frame_tables,
    run_protocol,
)
from .solver import FixedPointConvergenceError, FixedPointResult, cr_output, solve

_NAMED_GATE_ARITY = {"I": 1, "X": 1, "H": 1, "SWAP": 2, "CH": 2}


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = 1e-10
    convergence_tol: float = 1e-12
    max_iters: int = 100_000
    seed: int = 0
    trials: int = 1000
    format: str = "text"

    def __post_init__(self) -> None:
        if self.tolerance <= 0 or self.convergence_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")

    def tolerances(self) -> Tolerances:
        return Tolerances(validity=self.tolerance, convergence=self.convergence_tol)


class CircuitFileError(ValueError):
    """Malformed circuit document; the message names the offending field."""


# ---------------------------------------------------------------------------
# circuit document loading
# ---------------------------------------------------------------------------

def _gate_matrix(entry: dict, index: int) -> np.ndarray:
    name = entry.get("name")
    targets = entry.get("targets")
    if not isinstance(targets, list) or not targets:
        raise CircuitFileError(f"gates[{index}].targets must be a non-empty list")
    if name == "unitary":
        flat = entry.get("matrix")
        dim = 2 ** len(targets)
        if not isinstance(flat, list) or len(flat) != dim * dim:
            raise CircuitFileError(
                f"gates[{index}].matrix must be a row-major list of {dim * dim} "
                f"[re, im] pairs for {len(targets)} target qubit(s)"
            )
        try:
            values = [complex(re, im) for re, im in flat]
        except (TypeError, ValueError):
            raise CircuitFileError(
                f"gates[{index}].matrix entries must be [re, im] pairs"
            ) from None
        return np.array(values, dtype=complex).reshape(dim, dim)
    if name not in _NAMED_GATE_ARITY:
        valid = ", ".join(sorted(_NAMED_GATE_ARITY) + ["unitary"])
        raise CircuitFileError(
            f"gates[{index}].name is {name!r}; valid names are: {valid}"
        )
    if len(targets) != _NAMED_GATE_ARITY[name]:
        raise CircuitFileError(
            f"gates[{index}]: gate {name} takes {_NAMED_GATE_ARITY[name]} "
            f"target(s), got {len(targets)}"
        )
    return standard_gate(name)


def load_circuit(path: str) -> CtcCircuit:
    """Build a circuit from a JSON document.

    The document needs integer fields ``n_cr`` and ``n_ctc`` plus a ``gates``
    list applied first-to-last.  Each gate entry has a ``name`` (I, X, H,
    SWAP, CH, or ``unitary`` with a row-major ``matrix`` of [re, im] pairs),
    ``targets``, and optionally ``controls`` with a ``control_pattern``.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise CircuitFileError(f"cannot read circuit file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CircuitFileError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None

    if not isinstance(doc, dict):
        raise CircuitFileError(f"{path}: top level must be a JSON object")
    for fld in ("n_cr", "n_ctc"):
        if not isinstance(doc.get(fld), int) or doc[fld] < 0:
            raise CircuitFileError(f"{path}: field {fld!r} must be a nonnegative integer")
    gates = doc.get("gates")
    if not isinstance(gates, list):
        raise CircuitFileError(f"{path}: field 'gates' must be a list")

    total = doc["n_cr"] + doc["n_ctc"]
    unitary = np.eye(2**total, dtype=complex)
    for i, entry in enumerate(gates):
        if not isinstance(entry, dict):
            raise CircuitFileError(f"{path}: gates[{i}] must be an object")
        try:
            g = _gate_matrix(entry, i)
            controls = entry.get("controls", [])
            pattern = entry.get("control_pattern", "")
            step = controlled_on_pattern(
                controls, pattern, g, entry["targets"], total
            )
        except (CircuitFileError, ValueError) as exc:
            raise CircuitFileError(f"{path}: {exc}") from None
        unitary = step @ unitary  # first listed gate acts first
    try:
        return CtcCircuit(
            n_cr=doc["n_cr"],
            n_ctc=doc["n_ctc"],
            unitary=unitary,
            label=str(doc.get("label", "custom")),
        )
    except ValueError as exc:
        raise CircuitFileError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _num(x: float) -> float:
    v = float(f"{float(x):.12g}")
    return v + 0.0  # normalize -0.0


def _pair(z: complex) -> list[float]:
    return [_num(z.real), _num(z.imag)]


def _matrix_doc(m: np.ndarray) -> list[list[list[float]]]:
    return [[_pair(complex(z)) for z in row] for row in np.asarray(m)]


def _config_doc(cfg: RunConfig) -> dict:
    return {
        "tolerance": _num(cfg.tolerance),
        "convergence_tol": _num(cfg.convergence_tol),
        "max_iters": cfg.max_iters,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "format": cfg.format,
    }


def _fixed_point_doc(fp: FixedPointResult) -> dict:
    return {
        "unique": bool(fp.unique),
        "residual": _num(fp.residual),
        "matrix": _matrix_doc(fp.selected),
    }


def _distribution_doc(dist: OutcomeDistribution | dict) -> dict:
    items = dist.as_dict() if isinstance(dist, OutcomeDistribution) else dist
    return {label: _num(p) for label, p in sorted(items.items())}


def machine_doc_scenario(report: ScenarioReport, cfg: RunConfig, name: str) -> dict:
    return {
        "scenario": name,
        "config": _config_doc(cfg),
        "fixed_point": _fixed_point_doc(report.fixed_point),
        "output_state": _matrix_doc(report.output_state),
        "distribution": _distribution_doc(report.distribution),
    }


def machine_doc_signal(
    report: SignalingReport,
    cfg: RunConfig,
    fixed_point: FixedPointResult,
    output_state: np.ndarray,
    exact_table: dict[str, float],
) -> dict:
    return {
        "scenario": "signal",
        "config": _config_doc(cfg),
        "fixed_point": _fixed_point_doc(fixed_point),
        "output_state": _matrix_doc(output_state),
        "distribution": _distribution_doc(exact_table),
        "signaling": {
            "message": report.message,
            "basis": report.basis,
            "axis": AXIS_LABEL[report.basis],
            "ordering": report.ordering,
            "trials": report.trials,
            "accuracy": _num(report.accuracy),
            "frequencies": _distribution_doc(report.frequencies),
            "frame_tables": {
                frame: _distribution_doc(table)
                for frame, table in sorted(report.frame_tables.items())
            },
            "c2_events": [list(ev) for ev in report.c2_zero_probability_events],
            "c1_verdict": report.c1_verdict,
            "c2_pruning_applied": report.c2_pruning_applied,
            "alice_posthoc_fair_coin": report.alice_posthoc_fair_coin,
        },
    }


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _text_matrix(m: np.ndarray, indent: str = "    ") -> list[str]:
    lines = []
    for row in np.asarray(m):
        cells = " ".join(f"{z.real:+.6f}{z.imag:+.6f}j" for z in row)
        lines.append(f"{indent}[ {cells} ]")
    return lines


def _text_fixed_point(fp: FixedPointResult) -> list[str]:
    lines = [
        "fixed point on the CTC register:",
        f"  unique: {'yes' if fp.unique else 'no'}"
        f" (subspace dimension {len(fp.basis) if fp.basis is not None else '?'})",
        f"  residual: {_fmt(fp.residual)}",
    ]
    if fp.iterations_used is not None:
        lines.append(f"  iterations used: {fp.iterations_used}")
    if fp.rank_ambiguous:
        lines.append("  warning: numerical rank ambiguous near the cutoff")
    lines.append("  state:")
    lines.extend(_text_matrix(fp.selected))
    return lines


def text_scenario(report: ScenarioReport, name: str) -> str:
    lines = [
        f"scenario: {name}",
        f"circuit: {report.circuit_label}",
        f"CR input: {report.cr_input_label}",
    ]
    if report.classical is not None:
        fixed = report.classical.fixed_points
        lines.append("classical transition analysis:")
        lines.append(
            "  fixed points: "
            + (", ".join(str(s) for s in fixed) if fixed else "none")
        )
        cycles = " ".join(
            "(" + " ".join(str(s) for s in cyc) + ")" for cyc in report.classical.cycles
        )
        lines.append(f"  cycles: {cycles}")
    lines.extend(_text_fixed_point(report.fixed_point))
    lines.append("output state on the CR register:")
    lines.extend(_text_matrix(report.output_state))
    lines.append("outcome distribution (computational basis):")
    for label, p in sorted(report.distribution.as_dict().items()):
        lines.append(f"  {label}  {_fmt(p)}")
    return "\n".join(lines) + "\n"


def text_signal(report: SignalingReport) -> str:
    lines = [
        "signaling protocol",
        f"message: {report.message}"
        f" (Alice measures along {AXIS_LABEL[report.basis]}, the {report.basis} basis)",
        f"ordering: {report.ordering}",
        f"trials: {report.trials}",
        "decoding partition: {10, 11} -> hadamard/X (yes), {00, 01} -> computational/Z (no)",
        "empirical outcome frequencies:",
    ]
    for label, p in sorted(report.frequencies.items()):
        lines.append(f"  {label}  {_fmt(p)}")
    lines.append(f"decoding accuracy: {_fmt(report.accuracy)}")
    lines.append("exact frame tables:")
    for frame, table in sorted(report.frame_tables.items()):
        cells = "  ".join(f"{label}: {_fmt(p)}" for label, p in sorted(table.items()))
        lines.append(f"  {frame}:  {cells}")
    events = ", ".join(f"({b}, {o})" for b, o in report.c2_zero_probability_events)
    lines.append(f"zero-probability events (C2): {events if events else 'none'}")
    lines.append(
        "frames agree on occurring events (C1): "
        + ("yes" if report.c1_verdict else "no")
    )
    if report.c2_pruning_applied:
        lines.append("sampling was conditioned on C2 (pruned events cannot occur)")
    if report.alice_posthoc_fair_coin:
        lines.append(
            "note: in bob-first frames Alice's later outcome is recorded as an"
            " independent fair coin"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctcsim",
        description="Simulate self-consistent quantum circuits with CTC-bound qubits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("text", "machine"), default="text")
        p.add_argument(
            "--tol", type=float, default=1e-10,
            help="state-validity tolerance for the solver (default 1e-10)",
        )

    p_scen = sub.add_parser("scenario", help="run a canned experiment")
    p_scen.add_argument("name", choices=("not-gate", "bhw2", "bhw4"))
    p_scen.add_argument(
        "--input", default="zero",
        help="input state: zero|minus for bhw2, zero|one|plus|minus for bhw4",
    )
    common(p_scen)

    p_sig = sub.add_parser("signal", help="run the singlet signaling protocol")
    p_sig.add_argument("--message", choices=("yes", "no"), default="yes")
    p_sig.add_argument(
        "--ordering", choices=("alice-first", "bob-first"), default="alice-first"
    )
    p_sig.add_argument("--trials", type=int, default=1000)
    p_sig.add_argument("--seed", type=int, default=0)
    common(p_sig)

    p_fp = sub.add_parser("fixed-point", help="solve a circuit from a JSON document")
    p_fp.add_argument("--circuit", required=True, metavar="FILE")
    p_fp.add_argument(
        "--input", default=None,
        help="CR input zero|one|plus|minus (single CR qubit only; "
        "default: maximally mixed)",
    )
    common(p_fp)
    return parser


def _emit(doc_or_text, machine: bool) -> None:
    if machine:
        sys.stdout.write(json.dumps(doc_or_text, sort_keys=True, separators=(",", ":")))
        sys.stdout.write("\n")
    else:
        sys.stdout.write(doc_or_text)


def _cmd_scenario(args: argparse.Namespace, cfg: RunConfig) -> int:
    tolerances = cfg.tolerances()
    if args.name == "not-gate":
        report = run_not_gate(tolerances)
        name = "not-gate"
    elif args.name == "bhw2":
        if args.input not in BHW2_INPUTS:
            valid = ", ".join(sorted(BHW2_INPUTS))
            sys.stderr.write(f"ctcsim: bhw2 input must be one of: {valid}\n")
            return 2
        report = run_bhw2(args.input, tolerances)
        name = f"bhw2:{args.input}"
    else:
        if args.input not in BHW4_INPUTS:
            valid = ", ".join(sorted(BHW4_INPUTS))
            sys.stderr.write(f"ctcsim: bhw4 input must be one of: {valid}\n")
            return 2
        report = run_bhw4(args.input, tolerances)
        name = f"bhw4:{args.input}"
    if cfg.format == "machine":
        _emit(machine_doc_scenario(report, cfg, name), machine=True)
    else:
        _emit(text_scenario(report, name), machine=False)
    return 0


def _cmd_signal(args: argparse.Namespace, cfg: RunConfig) -> int:
    ordering = args.ordering.replace("-", "_")
    from .gates import bhw4_circuit
    from .linalg import kron, partial_trace
    from .signaling import make_singlet

    report = run_protocol(args.message, ordering, cfg.trials, cfg.seed)
    # device characterization: the discriminator on Bob's reduced half
    circuit = bhw4_circuit()
    bob_half = partial_trace(make_singlet(), [2, 2], keep=(1,))
    cr_in = kron(bob_half, projector("0"))
    fixed = solve(circuit, cr_in, tolerances=cfg.tolerances())
    output = cr_output(circuit, cr_in, result=fixed, tolerances=cfg.tolerances())
    if cfg.format == "machine":
        doc = machine_doc_signal(
            report, cfg, fixed, output, report.frame_tables[ordering]
        )
        _emit(doc, machine=True)
    else:
        _emit(text_signal(report), machine=False)
    return 0


def _cmd_fixed_point(args: argparse.Namespace, cfg: RunConfig) -> int:
    circuit = load_circuit(args.circuit)
    if args.input is not None:
        if circuit.n_cr != 1:
            sys.stderr.write(
                "ctcsim: --input names a single-qubit state but the circuit has "
                f"{circuit.n_cr} CR qubits\n"
            )
            return 2
        inputs = {"zero": "0", "one": "1", "plus": "+", "minus": "-"}
        if args.input not in inputs:
            sys.stderr.write(
                f"ctcsim: --input must be one of: {', '.join(sorted(inputs))}\n"
            )
            return 2
        cr_input = projector(inputs[args.input])
        input_label = f"|{inputs[args.input]}>"
    else:
        cr_input = maximally_mixed(circuit.cr_dim)
        input_label = f"I/{circuit.cr_dim}"
    tolerances = cfg.tolerances()
    fixed = solve(circuit, cr_input, tolerances=tolerances, max_iters=cfg.max_iters)
    output = cr_output(circuit, cr_input, result=fixed, tolerances=tolerances)
    distribution = measure_computational(output, range(circuit.n_cr))
    if cfg.format == "machine":
        doc = {
            "scenario": f"fixed-point:{circuit.label}",
            "config": _config_doc(cfg),
            "fixed_point": _fixed_point_doc(fixed),
            "output_state": _matrix_doc(output),
            "distribution": _distribution_doc(distribution),
        }
        _emit(doc, machine=True)
    else:
        lines = [
            f"fixed-point solve: {circuit.label}",
            f"circuit: {circuit.n_cr} CR + {circuit.n_ctc} CTC qubits",
            f"CR input: {input_label}",
        ]
        lines.extend(_text_fixed_point(fixed))
        lines.append("output state on the CR register:")
        lines.extend(_text_matrix(output))
        lines.append("outcome distribution (computational basis):")
        for label, p in sorted(distribution.as_dict().items()):
            lines.append(f"  {label}  {_fmt(p)}")
        _emit("\n".join(lines) + "\n", machine=False)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            tolerance=args.tol,
            seed=getattr(args, "seed", 0),
            trials=getattr(args, "trials", 1000),
            format=args.format,
        )
    except ValueError as exc:
        sys.stderr.write(f"ctcsim: {exc}\n")
        return 2
    try:
        if args.command == "scenario":
            return _cmd_scenario(args, cfg)
        if args.command == "signal":
            return _cmd_signal(args, cfg)
        return _cmd_fixed_point(args, cfg)
    except CircuitFileError as exc:
        sys.stderr.write(f"ctcsim: {exc}\n")
        return 2
    except FixedPointConvergenceError as exc:
        sys.stderr.write(f"ctcsim: solver failed: {exc}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"ctcsim: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
