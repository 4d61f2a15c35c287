from math import asin, sin, sqrt

import numpy as np
import pytest

from qcpredict.circuit import Circuit, CircuitError, gate, validate
from qcpredict.generators import (
    DEFAULT_RANDOM_VARIANTS,
    FAMILIES,
    dj,
    generate_corpus,
    ghz,
    grover,
    qaoa,
    qft,
    random_circuit,
    wstate,
)
from qcpredict.simulator import simulate_statevector, strip_nonunitary


def _state(circuit):
    return simulate_statevector(strip_nonunitary(circuit))


def test_ghz_state():
    s = _state(ghz(3))
    assert abs(s[0]) ** 2 == pytest.approx(0.5, abs=1e-12)
    assert abs(s[7]) ** 2 == pytest.approx(0.5, abs=1e-12)
    assert np.sum(np.abs(s) ** 2) == pytest.approx(1.0)
    assert abs(s[1]) == pytest.approx(0.0, abs=1e-12)


def test_ghz_shape_and_name():
    c = ghz(5)
    assert c.name == "ghz_005"
    assert c.num_qubits == 5 and c.num_clbits == 5
    assert c.num_gates() == 5  # h + 4 cx
    assert sum(1 for op in c.ops if op.kind == "measure") == 5
    validate(c)


def test_wstate_uniform_one_hot():
    for n in (2, 3, 4, 6):
        s = _state(wstate(n))
        onehot = [1 << k for k in range(n)]
        for i in onehot:
            assert s[i].real == pytest.approx(1.0 / sqrt(n), abs=1e-12)
            assert s[i].imag == pytest.approx(0.0, abs=1e-12)
        mass = sum(abs(s[i]) ** 2 for i in onehot)
        assert mass == pytest.approx(1.0, abs=1e-12)


def test_dj_constant_oracle_reads_all_zeros():
    c = dj(4, variant=0)
    s = _state(c)
    # inputs are qubits 0..2 (ancilla last); all-zero inputs carry all the mass
    n = 4
    prob_zero_inputs = sum(
        abs(s[i]) ** 2 for i in range(2 ** n) if (i >> 1) == 0  # upper 3 bits zero
    )
    assert prob_zero_inputs == pytest.approx(1.0, abs=1e-12)


def test_dj_balanced_oracle_never_reads_zeros():
    for variant in (1, 2):
        c = dj(4, variant=variant, seed=5)
        s = _state(c)
        prob_zero_inputs = sum(abs(s[i]) ** 2 for i in range(16) if (i >> 1) == 0)
        assert prob_zero_inputs == pytest.approx(0.0, abs=1e-12)


def test_dj_measures_inputs_only():
    c = dj(5, variant=1, seed=0)
    measures = [op for op in c.ops if op.kind == "measure"]
    assert len(measures) == 4
    assert all(op.qubits[0] != 4 for op in measures)
    assert c.num_clbits == 4


def test_qft_matches_dft_matrix():
    n = 3
    size = 2 ** n
    dft = np.array(
        [[np.exp(2j * np.pi * j * k / size) for k in range(size)] for j in range(size)]
    ) / np.sqrt(size)
    core = strip_nonunitary(qft(n))
    for j in range(size):
        prep = tuple(gate("x", (q,)) for q in range(n) if (j >> (n - 1 - q)) & 1)
        out = simulate_statevector(Circuit(n, 0, prep + core.ops, "probe"))
        assert np.allclose(out, dft[:, j], atol=1e-9), j


def test_grover_amplifies_all_ones():
    s2 = _state(grover(2))
    assert abs(s2[3]) ** 2 == pytest.approx(1.0, abs=1e-12)
    s3 = _state(grover(3))
    theta = asin(1.0 / sqrt(8.0))
    assert abs(s3[7]) ** 2 == pytest.approx(sin(5 * theta) ** 2, abs=1e-9)


def test_grover_rejects_unsupported_sizes():
    with pytest.raises(CircuitError):
        grover(4)
    with pytest.raises(CircuitError):
        grover(1)


def test_qaoa_structure():
    c = qaoa(5, layers=2, seed=3)
    assert c.name == "qaoa_005_p2"
    counts = c.gate_counts()
    assert counts["h"] == 5
    assert counts["rzz"] == 10  # 5 ring edges x 2 layers
    assert counts["rx"] == 10
    validate(c)
    # two qubits: the ring degenerates to one edge
    c2 = qaoa(2, layers=1, seed=0)
    assert c2.gate_counts()["rzz"] == 1


def test_qaoa_seeded_angles_reproduce():
    a = qaoa(4, layers=2, seed=9)
    b = qaoa(4, layers=2, seed=9)
    assert a.ops == b.ops
    c = qaoa(4, layers=2, seed=10)
    assert a.ops != c.ops


def test_random_circuit_shape_and_determinism():
    c = random_circuit(4, seed=8, variant=2)
    assert c.name == "random_004_v2"
    assert c.num_gates() == 16
    assert sum(1 for op in c.ops if op.kind == "measure") == 4
    validate(c)
    again = random_circuit(4, seed=8, variant=2)
    assert c.ops == again.ops
    other = random_circuit(4, seed=8, variant=3)
    assert c.ops != other.ops


def test_random_circuit_no_toffoli_below_three_qubits():
    for seed in range(30):
        c = random_circuit(2, seed=seed)
        assert all(len(op.qubits) <= 2 for op in c.ops)


def test_random_circuit_params_in_range():
    c = random_circuit(6, seed=1)
    for op in c.gates():
        for p in op.params:
            assert 0.0 <= p < 2 * np.pi


def test_generators_reject_tiny_sizes():
    for build in (ghz, wstate, dj, qft):
        with pytest.raises(CircuitError):
            build(1)
    with pytest.raises(CircuitError):
        qaoa(3, layers=0)


def test_corpus_default_count():
    corpus = generate_corpus()
    # 129 sizes for 7 families: 1+1+3+1+3+7 variants each, grover only at 2 and 3
    assert len(corpus) == 2066
    names = [c.name for c in corpus]
    assert len(set(names)) == len(names)


def test_corpus_desk_count():
    corpus = generate_corpus(qubit_range=(2, 30), random_variants=9)
    assert len(corpus) == 29 * (1 + 1 + 3 + 1 + 3 + 9) + 2
    assert len(corpus) == 524


def test_corpus_family_subset_and_order():
    corpus = generate_corpus(families=("qft", "ghz"), qubit_range=(2, 4))
    assert [c.name for c in corpus] == ["qft_002", "qft_003", "qft_004", "ghz_002", "ghz_003", "ghz_004"]


def test_corpus_deterministic():
    a = generate_corpus(families=("random", "qaoa", "dj"), qubit_range=(2, 5), seed=4)
    b = generate_corpus(families=("random", "qaoa", "dj"), qubit_range=(2, 5), seed=4)
    assert [(c.name, c.ops) for c in a] == [(d.name, d.ops) for d in b]
    shifted = generate_corpus(families=("random",), qubit_range=(2, 5), seed=5)
    assert any(c.ops != d.ops for c, d in zip(a, shifted))


def test_corpus_validation():
    with pytest.raises(ValueError, match="unknown circuit family"):
        generate_corpus(families=("ghz", "bogus"))
    with pytest.raises(ValueError, match="qubit range"):
        generate_corpus(qubit_range=(5, 3))
    with pytest.raises(ValueError, match="qubit range"):
        generate_corpus(qubit_range=(0, 4))
    with pytest.raises(ValueError, match="qubit range"):
        generate_corpus(qubit_range=(2, 500))


def test_family_list_is_stable():
    assert FAMILIES == ("ghz", "wstate", "dj", "qft", "grover", "qaoa", "random")
    assert DEFAULT_RANDOM_VARIANTS == 7
