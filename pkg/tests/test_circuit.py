import pytest

from qcpredict.circuit import (
    CANONICAL_GATES,
    GATE_SIGNATURES,
    Circuit,
    CircuitError,
    barrier,
    circuit_depth,
    gate,
    interaction_graph,
    measure,
    validate,
)


def ghz3():
    ops = (
        gate("h", (0,)),
        gate("cx", (0, 1)),
        gate("cx", (1, 2)),
        measure(0, 0),
        measure(1, 1),
        measure(2, 2),
    )
    return Circuit(3, 3, ops, name="ghz3")


def test_gate_builder_checks_arity_and_params():
    assert gate("cx", (0, 1)).qubits == (0, 1)
    assert gate("rz", (2,), (0.5,)).params == (0.5,)
    with pytest.raises(CircuitError):
        gate("nope", (0,))
    with pytest.raises(CircuitError):
        gate("cx", (0,))
    with pytest.raises(CircuitError):
        gate("rz", (0,))  # missing angle
    with pytest.raises(CircuitError):
        gate("cx", (1, 1))


def test_vocabulary_is_stable():
    # downstream feature vectors index into this exact ordering
    assert len(CANONICAL_GATES) == 31
    assert CANONICAL_GATES == tuple(GATE_SIGNATURES)
    assert CANONICAL_GATES[0] == "id"
    assert "measure" not in GATE_SIGNATURES
    assert all(GATE_SIGNATURES[k][0] in (1, 2, 3) for k in CANONICAL_GATES)


def test_circuit_is_immutable_and_validates_register():
    c = ghz3()
    with pytest.raises(Exception):
        c.num_qubits = 5
    with pytest.raises(CircuitError):
        Circuit(0)
    with pytest.raises(CircuitError):
        Circuit(2, -1)


def test_ghz3_depth_is_4():
    sched = circuit_depth(ghz3())
    assert sched.depth == 4
    # h | cx(0,1) | cx(1,2) | measures; the qubit-2 measure waits for its cx
    assert sched.layer_of == (1, 2, 3, 3, 4, 4)


def test_depth_of_empty_circuit_is_0():
    assert circuit_depth(Circuit(2)).depth == 0


def test_parallel_layers():
    ops = (gate("h", (0,)), gate("h", (1,)), gate("cx", (0, 1)))
    sched = circuit_depth(Circuit(2, 0, ops))
    assert sched.depth == 2
    assert sched.layer_of == (1, 1, 2)


def test_gate_counts_and_num_gates():
    c = ghz3()
    counts = c.gate_counts()
    assert counts == {"h": 1, "cx": 2, "measure": 3}
    assert c.num_gates() == 3  # measures are not gates


def test_interaction_graph_pairs():
    c = ghz3()
    assert interaction_graph(c) == {(0, 1), (1, 2)}
    ops = (gate("ccx", (2, 0, 1)),)
    assert interaction_graph(Circuit(3, 0, ops)) == {(0, 2), (1, 2), (0, 1)}
    assert interaction_graph(Circuit(3)) == set()


def test_barrier_does_not_interact_but_occupies_a_layer():
    ops = (gate("h", (0,)), barrier((0, 1)), gate("h", (1,)))
    c = Circuit(2, 0, ops)
    assert interaction_graph(c) == set()
    assert circuit_depth(c).depth == 3


def test_validate_accepts_ghz_and_rejects_bad_ops():
    validate(ghz3())
    from qcpredict.circuit import Instruction

    bad = Circuit(2, 1, (Instruction("cx", (0, 3)),))
    with pytest.raises(CircuitError, match="outside register"):
        validate(bad)
    with pytest.raises(CircuitError, match="classical register"):
        validate(Circuit(2, 1, (measure(0, 5),)))
    with pytest.raises(CircuitError, match="unknown kind"):
        validate(Circuit(2, 0, (Instruction("frobnicate", (0,)),)))
    with pytest.raises(CircuitError, match="duplicate"):
        validate(Circuit(2, 0, (Instruction("cx", (1, 1)),)))


def test_with_ops_preserves_registers():
    c = ghz3()
    trimmed = c.with_ops(c.ops[:2])
    assert trimmed.num_qubits == 3 and trimmed.num_clbits == 3
    assert trimmed.name == "ghz3"
    assert len(trimmed.ops) == 2
