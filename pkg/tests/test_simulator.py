from math import pi, sqrt

import numpy as np
import pytest

from qcpredict.circuit import CANONICAL_GATES, GATE_SIGNATURES, Circuit, barrier, gate, measure
from qcpredict.generators import random_circuit
from qcpredict.simulator import (
    MAX_SIM_QUBITS,
    SimulationError,
    check_equivalence,
    gate_matrix,
    simulate_statevector,
    strip_nonunitary,
)


def test_known_matrices():
    h = gate_matrix("h", ())
    assert np.allclose(h, np.array([[1, 1], [1, -1]]) / sqrt(2))
    assert np.allclose(gate_matrix("x", ()), [[0, 1], [1, 0]])
    cx = gate_matrix("cx", ())
    assert np.allclose(cx, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    assert np.allclose(gate_matrix("rz", (pi,)), np.diag([np.exp(-1j * pi / 2), np.exp(1j * pi / 2)]))


def test_all_gate_matrices_are_unitary():
    rng = np.random.default_rng(3)
    for kind in CANONICAL_GATES:
        arity, nparams = GATE_SIGNATURES[kind]
        params = tuple(rng.uniform(0, 2 * pi, size=nparams))
        u = gate_matrix(kind, params)
        dim = 2**arity
        assert u.shape == (dim, dim)
        assert np.allclose(u @ u.conj().T, np.eye(dim), atol=1e-12), kind


def test_bell_state():
    c = Circuit(2, 0, (gate("h", (0,)), gate("cx", (0, 1))))
    psi = simulate_statevector(c).reshape(-1)
    assert np.allclose(psi, [1 / sqrt(2), 0, 0, 1 / sqrt(2)])


def test_first_qubit_is_most_significant():
    c = Circuit(2, 0, (gate("x", (0,)),))
    psi = simulate_statevector(c).reshape(-1)
    assert np.allclose(psi, [0, 0, 1, 0])  # |10>


def test_statevector_matches_dense_kron_oracle():
    # independent oracle: build the full 2^n x 2^n operator by kron embedding
    def dense(circuit):
        n = circuit.num_qubits
        total = np.eye(2**n, dtype=complex)
        for op in circuit.ops:
            u = gate_matrix(op.kind, op.params)
            full = _embed(u, op.qubits, n)
            total = full @ total
        return total[:, 0]

    def _embed(u, qubits, n):
        k = len(qubits)
        u = u.reshape((2,) * (2 * k))
        full = np.zeros((2**n, 2**n), dtype=complex)
        for row in range(2**n):
            bits = [(row >> (n - 1 - q)) & 1 for q in range(n)]
            for sub in range(2**k):
                amp_bits = list(bits)
                idx_in = tuple((row >> (n - 1 - q)) & 1 for q in qubits)
                out_bits = [(sub >> (k - 1 - j)) & 1 for j in range(k)]
                for j, q in enumerate(qubits):
                    amp_bits[q] = out_bits[j]
                col = row
                amp = u[tuple(out_bits) + idx_in]
                dst = sum(b << (n - 1 - q) for q, b in enumerate(amp_bits))
                full[dst, col] += amp
        return full

    for i in range(8):
        c = strip_nonunitary(random_circuit(3, seed=50 + i, variant=i))
        psi = simulate_statevector(c).reshape(-1)
        assert np.allclose(psi, dense(c), atol=1e-10)


def test_measure_rejected_in_statevector():
    c = Circuit(1, 1, (measure(0, 0),))
    with pytest.raises(SimulationError):
        simulate_statevector(c)


def test_qubit_cap_enforced():
    c = Circuit(MAX_SIM_QUBITS + 1)
    with pytest.raises(SimulationError, match="cap"):
        simulate_statevector(c)


def test_strip_nonunitary_removes_measure_and_barrier():
    c = Circuit(2, 2, (gate("h", (0,)), barrier((0, 1)), measure(0, 0), measure(1, 1)))
    stripped = strip_nonunitary(c)
    assert [op.kind for op in stripped.ops] == ["h"]


def identity_layout(n):
    return {q: q for q in range(n)}


def test_equivalence_identity():
    c = Circuit(2, 0, (gate("h", (0,)), gate("cx", (0, 1))))
    assert check_equivalence(c, c, identity_layout(2))


def test_equivalence_up_to_global_phase():
    # rz(t) = u1(t) up to a global phase of exp(-i t/2)
    a = Circuit(1, 0, (gate("u1", (0,), (0.7,)),))
    b = Circuit(1, 0, (gate("rz", (0,), (0.7,)),))
    assert check_equivalence(a, b, identity_layout(1))


def test_equivalence_detects_wrong_circuit():
    a = Circuit(2, 0, (gate("h", (0,)), gate("cx", (0, 1))))
    b = Circuit(2, 0, (gate("h", (0,)), gate("cx", (1, 0))))
    assert not check_equivalence(a, b, identity_layout(2))


def test_equivalence_under_permuted_layout():
    a = Circuit(2, 0, (gate("h", (0,)), gate("cx", (0, 1))))
    b = Circuit(2, 0, (gate("h", (1,)), gate("cx", (1, 0))))
    assert check_equivalence(a, b, {0: 1, 1: 0})
    # an asymmetric state flags a wrong layout
    a = Circuit(2, 0, (gate("x", (0,)),))
    b = Circuit(2, 0, (gate("x", (1,)),))
    assert check_equivalence(a, b, {0: 1, 1: 0})
    assert not check_equivalence(a, b, identity_layout(2))


def test_equivalence_with_idle_ancillas_on_wide_register():
    a = Circuit(2, 0, (gate("h", (0,)), gate("cx", (0, 1))))
    b = Circuit(100, 0, (gate("h", (40,)), gate("cx", (40, 41))))
    assert check_equivalence(a, b, {0: 40, 1: 41})


def test_equivalence_rejects_disturbed_ancilla():
    a = Circuit(2, 0, (gate("h", (0,)),))
    b = Circuit(3, 0, (gate("h", (0,)), gate("x", (2,))))
    assert not check_equivalence(a, b, {0: 0, 1: 1})


def test_equivalence_compares_measures_through_layout():
    a = Circuit(2, 2, (gate("x", (0,)), measure(0, 0), measure(1, 1)))
    b = Circuit(2, 2, (gate("x", (1,)), measure(1, 0), measure(0, 1)))
    assert check_equivalence(a, b, {0: 1, 1: 0})
    b_wrong = Circuit(2, 2, (gate("x", (1,)), measure(0, 0), measure(1, 1)))
    assert not check_equivalence(a, b_wrong, {0: 1, 1: 0})


def test_equivalence_layout_validation():
    a = Circuit(2, 0, (gate("h", (0,)),))
    b = Circuit(2)
    with pytest.raises(SimulationError, match="cover"):
        check_equivalence(a, b, {0: 0})
    with pytest.raises(SimulationError, match="injective"):
        check_equivalence(a, b, {0: 0, 1: 0})
    with pytest.raises(SimulationError, match="outside"):
        check_equivalence(a, b, {0: 0, 1: 5})


def test_equivalence_active_set_cap():
    a = Circuit(13, 0, tuple(gate("h", (q,)) for q in range(13)))
    b = Circuit(20, 0, tuple(gate("h", (q,)) for q in range(13)))
    with pytest.raises(SimulationError, match="cap"):
        check_equivalence(a, b, identity_layout(13))
