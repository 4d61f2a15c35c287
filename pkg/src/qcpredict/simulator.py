"""Dense statevector simulation, sized for equivalence checking of small circuits.

Qubit i maps to tensor axis i, most significant first, so basis index
b(q0)b(q1)... reads left to right. Capped at 12 qubits; gates only, so strip
measures and barriers before simulating.
"""
from __future__ import annotations

from math import cos, pi, sin, sqrt

import numpy as np

from .circuit import BARRIER, MEASURE, Circuit, Instruction

MAX_SIM_QUBITS = 12


class SimulationError(ValueError):
    """Circuit outside the simulable subset."""


def _u3(theta: float, phi: float, lam: float) -> np.ndarray:
    return np.array(
        [
            [cos(theta / 2), -np.exp(1j * lam) * sin(theta / 2)],
            [np.exp(1j * phi) * sin(theta / 2), np.exp(1j * (phi + lam)) * cos(theta / 2)],
        ]
    )


def _rx(t: float) -> np.ndarray:
    return np.array([[cos(t / 2), -1j * sin(t / 2)], [-1j * sin(t / 2), cos(t / 2)]])


def _ry(t: float) -> np.ndarray:
    return np.array([[cos(t / 2), -sin(t / 2)], [sin(t / 2), cos(t / 2)]])


def _rz(t: float) -> np.ndarray:
    return np.diag([np.exp(-1j * t / 2), np.exp(1j * t / 2)])


def _controlled(u: np.ndarray) -> np.ndarray:
    m = np.eye(4, dtype=complex)
    m[2:, 2:] = u
    return m


_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / sqrt(2)
_S = np.diag([1, 1j]).astype(complex)
_T = np.diag([1, np.exp(1j * pi / 4)])
_SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])

_SWAP = np.eye(4, dtype=complex)[[0, 2, 1, 3]]


def gate_matrix(kind: str, params: tuple[float, ...]) -> np.ndarray:
    """Unitary for one gate; row/column order follows the op's qubit order."""
    if kind == "id":
        return _I
    if kind == "x":
        return _X
    if kind == "y":
        return _Y
    if kind == "z":
        return _Z
    if kind == "h":
        return _H
    if kind == "s":
        return _S
    if kind == "sdg":
        return _S.conj().T
    if kind == "t":
        return _T
    if kind == "tdg":
        return _T.conj().T
    if kind == "sx":
        return _SX
    if kind == "sxdg":
        return _SX.conj().T
    if kind == "rx":
        return _rx(params[0])
    if kind == "ry":
        return _ry(params[0])
    if kind == "rz":
        return _rz(params[0])
    if kind == "u1":
        return np.diag([1.0, np.exp(1j * params[0])])
    if kind == "u2":
        return _u3(pi / 2, params[0], params[1])
    if kind == "u3":
        return _u3(*params)
    if kind == "cx":
        return _controlled(_X)
    if kind == "cy":
        return _controlled(_Y)
    if kind == "cz":
        return _controlled(_Z)
    if kind == "ch":
        return _controlled(_H)
    if kind == "swap":
        return _SWAP
    if kind == "crx":
        return _controlled(_rx(params[0]))
    if kind == "cry":
        return _controlled(_ry(params[0]))
    if kind == "crz":
        return _controlled(_rz(params[0]))
    if kind == "cp":
        return _controlled(np.diag([1.0, np.exp(1j * params[0])]))
    if kind == "cu3":
        return _controlled(_u3(*params))
    if kind == "rxx":
        t = params[0]
        return cos(t / 2) * np.eye(4) - 1j * sin(t / 2) * np.kron(_X, _X)
    if kind == "rzz":
        t = params[0]
        return np.diag(np.exp(-1j * t / 2 * np.array([1, -1, -1, 1])))
    if kind == "ccx":
        m = np.eye(8, dtype=complex)
        m[6:, 6:] = _X
        return m
    if kind == "cswap":
        m = np.eye(8, dtype=complex)
        m[[5, 6], :] = 0
        m[5, 6] = m[6, 5] = 1
        return m
    raise SimulationError(f"no matrix for gate kind {kind!r}")


def _apply(state: np.ndarray, op: Instruction) -> np.ndarray:
    k = len(op.qubits)
    u = gate_matrix(op.kind, op.params).reshape((2,) * (2 * k))
    state = np.tensordot(u, state, axes=(tuple(range(k, 2 * k)), op.qubits))
    return np.moveaxis(state, tuple(range(k)), op.qubits)


def simulate_statevector(circuit: Circuit) -> np.ndarray:
    """Final state from |0...0>, as a flat vector of length 2**num_qubits."""
    if circuit.num_qubits > MAX_SIM_QUBITS:
        raise SimulationError(f"{circuit.num_qubits} qubits exceeds the {MAX_SIM_QUBITS}-qubit cap")
    state = np.zeros((2,) * circuit.num_qubits, dtype=complex)
    state[(0,) * circuit.num_qubits] = 1.0
    for op in circuit.ops:
        if op.kind in (MEASURE, BARRIER):
            raise SimulationError(f"cannot simulate {op.kind}; strip it first")
        state = _apply(state, op)
    return state.reshape(-1)


def strip_nonunitary(circuit: Circuit) -> Circuit:
    """Drop measures and barriers, keeping gate order."""
    return circuit.with_ops(tuple(op for op in circuit.ops if op.kind not in (MEASURE, BARRIER)))


def check_equivalence(a: Circuit, b: Circuit, layout: dict[int, int], atol: float = 1e-8) -> bool:
    """Compare two circuits up to global phase under a qubit relabeling.

    ``layout`` maps each qubit of ``a`` to the qubit of ``b`` holding its final
    state; remaining qubits of ``b`` must end in |0>. Measurements are compared
    as multisets of (physical qubit, classical bit) through the same layout.
    ``b`` is compacted to the qubits it actually touches, so wide-register
    circuits work as long as the active set stays within the simulator cap.
    """
    if sorted(layout) != list(range(a.num_qubits)):
        raise SimulationError("layout must cover exactly the qubits of the first circuit")
    if len(set(layout.values())) != len(layout):
        raise SimulationError("layout is not injective")
    for p in layout.values():
        if not 0 <= p < b.num_qubits:
            raise SimulationError(f"layout target {p} outside the second circuit")

    measures_a = sorted((layout[op.qubits[0]], op.clbit) for op in a.ops if op.kind == MEASURE)
    measures_b = sorted((op.qubits[0], op.clbit) for op in b.ops if op.kind == MEASURE)
    if measures_a != measures_b:
        return False

    a = strip_nonunitary(a)
    b = strip_nonunitary(b)

    active = sorted({q for op in b.ops for q in op.qubits} | set(layout.values()))
    if len(active) > MAX_SIM_QUBITS:
        raise SimulationError(f"{len(active)} active qubits exceeds the {MAX_SIM_QUBITS}-qubit cap")
    compact = {p: i for i, p in enumerate(active)}
    b_ops = tuple(Instruction(op.kind, tuple(compact[q] for q in op.qubits), op.params, op.clbit) for op in b.ops)
    b_small = Circuit(len(active), 0, b_ops)

    psi_a = simulate_statevector(a)
    psi_b = simulate_statevector(b_small).reshape((2,) * b_small.num_qubits)

    # reorder axes so a's qubits come first, then slice the rest at |0>
    logical_axes = [compact[layout[q]] for q in range(a.num_qubits)]
    rest = [ax for ax in range(b_small.num_qubits) if ax not in logical_axes]
    psi_b = np.transpose(psi_b, logical_axes + rest)
    psi_b = psi_b[(...,) + (0,) * len(rest)].reshape(-1)

    # weight outside the |0> block means b leaked state into its ancillas
    if abs(np.linalg.norm(psi_b) - 1.0) > atol:
        return False

    k = int(np.argmax(np.abs(psi_a)))
    if abs(psi_b[k]) < atol:
        return False
    phase = psi_a[k] / psi_b[k]
    return bool(np.allclose(psi_a, phase * psi_b, atol=atol, rtol=0.0))
