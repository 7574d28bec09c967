"""Trotterized circuit-resource estimates: gate counts, CNOTs, and critical-path depth.

First-order Trotterization, one exponential per Pauli term, standard CNOT
staircase synthesis, no fusion or cancellation between adjacent terms.
"""

from dataclasses import dataclass

from adaptforge.qubit_map import PauliKey, QubitOperator, pauli_letters

Gate = tuple[str, tuple[int, ...]]


@dataclass
class ResourceCount:
    total_gates: int = 0
    cnot_gates: int = 0
    single_qubit_gates: int = 0
    depth: int = 0

    def __post_init__(self):
        assert self.total_gates == self.cnot_gates + self.single_qubit_gates


def synthesize_term(key: PauliKey) -> list[Gate]:
    """Gate sequence for exp(i phi P): basis changes, CNOT staircase, one Rz, mirror.

    CNOT count is 2(w-1) for support weight w. The identity string synthesizes
    to an empty list.
    """
    letters = pauli_letters(key)
    if not letters:
        return []
    basis_in: list[Gate] = []
    basis_out: list[Gate] = []
    for q, letter in letters:
        if letter == "X":
            basis_in.append(("h", (q,)))
            basis_out.append(("h", (q,)))
        elif letter == "Y":
            basis_in.append(("rx", (q,)))
            basis_out.append(("rx", (q,)))
    qubits = [q for q, _ in letters]
    chain: list[Gate] = [("cnot", (qubits[k], qubits[k + 1])) for k in range(len(qubits) - 1)]
    rotation: list[Gate] = [("rz", (qubits[-1],))]
    return basis_in + chain + rotation + chain[::-1] + basis_out


def _schedule_depth(gates: list[Gate], start_depth: dict[int, int] | None = None) -> int:
    free: dict[int, int] = dict(start_depth or {})
    depth = max(free.values(), default=0)
    for _, qubits in gates:
        t = max((free.get(q, 0) for q in qubits), default=0)
        for q in qubits:
            free[q] = t + 1
        depth = max(depth, t + 1)
    return depth


def ansatz_resources(elements: list[tuple[QubitOperator, float]],
                     n_qubits: int, reference_occupied: int = 0) -> ResourceCount:
    """Totals over the reference preparation plus every Pauli term of every element.

    Terms are synthesized in canonical (packed-key) order so counts are
    deterministic; depth uses greedy per-qubit scheduling.
    """
    gates: list[Gate] = [("x", (q,)) for q in range(reference_occupied)]
    for qubit_form, _theta in elements:
        for key in sorted(qubit_form.terms):
            gates.extend(synthesize_term(key))
    cnot = sum(1 for name, _ in gates if name == "cnot")
    total = len(gates)
    return ResourceCount(
        total_gates=total,
        cnot_gates=cnot,
        single_qubit_gates=total - cnot,
        depth=_schedule_depth(gates),
    )


def resource_curve(rows) -> list[dict]:
    """Per-iteration (energy error, resource totals) table from trace rows."""
    out = []
    for row in rows:
        if row.gate_total < row.gate_cnot:
            raise ValueError("trace row carries inconsistent gate counts")
        out.append({
            "iteration": row.iteration,
            "n_parameters": row.n_parameters,
            "energy_error_ha": row.energy_error_vs_fci,
            "total_gates": row.gate_total,
            "cnot_gates": row.gate_cnot,
            "depth": row.gate_depth,
        })
    return out
