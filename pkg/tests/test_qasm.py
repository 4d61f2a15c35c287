from math import pi

import numpy as np
import pytest

from qcpredict.generators import random_circuit
from qcpredict.qasm import QasmError, parse_qasm, to_qasm

GHZ3 = """OPENQASM 2.0;
include "qelib1.inc";
qreg q[3];
creg c[3];
h q[0];
cx q[0],q[1];
cx q[1],q[2];
measure q[0] -> c[0];
measure q[1] -> c[1];
measure q[2] -> c[2];
"""


def test_parse_ghz3():
    c = parse_qasm(GHZ3, name="ghz3")
    assert c.num_qubits == 3 and c.num_clbits == 3
    assert c.name == "ghz3"
    kinds = [op.kind for op in c.ops]
    assert kinds == ["h", "cx", "cx", "measure", "measure", "measure"]
    assert c.ops[1].qubits == (0, 1)
    assert c.ops[3].clbit == 0


def test_missing_header_rejected():
    with pytest.raises(QasmError, match="OPENQASM 2.0"):
        parse_qasm("qreg q[2];\nh q[0];\n")


def test_no_qreg_rejected():
    with pytest.raises(QasmError, match="no qreg"):
        parse_qasm('OPENQASM 2.0;\ninclude "qelib1.inc";\n')


def test_multiple_registers_flatten_in_declaration_order():
    src = (
        "OPENQASM 2.0;\n"
        "qreg a[2];\nqreg b[3];\ncreg m[2];\ncreg n[1];\n"
        "h b[0];\ncx a[1],b[2];\nmeasure b[0] -> n[0];\n"
    )
    c = parse_qasm(src)
    assert c.num_qubits == 5 and c.num_clbits == 3
    assert c.ops[0].qubits == (2,)  # b[0] follows a's two slots
    assert c.ops[1].qubits == (1, 4)
    assert c.ops[2].qubits == (2,) and c.ops[2].clbit == 2


def test_single_qubit_gates_broadcast_over_registers():
    src = "OPENQASM 2.0;\nqreg q[3];\nh q;\n"
    c = parse_qasm(src)
    assert [op.qubits for op in c.ops] == [(0,), (1,), (2,)]


def test_register_measure_broadcast_requires_equal_sizes():
    good = "OPENQASM 2.0;\nqreg q[2];\ncreg c[2];\nmeasure q -> c;\n"
    c = parse_qasm(good)
    assert [(op.qubits[0], op.clbit) for op in c.ops] == [(0, 0), (1, 1)]
    bad = "OPENQASM 2.0;\nqreg q[2];\ncreg c[3];\nmeasure q -> c;\n"
    with pytest.raises(QasmError, match="arity mismatch"):
        parse_qasm(bad)


def test_two_qubit_register_broadcast_rejected():
    src = "OPENQASM 2.0;\nqreg q[2];\nqreg r[2];\ncx q,r;\n"
    with pytest.raises(QasmError, match="single-qubit"):
        parse_qasm(src)


def test_bare_barrier_covers_all_qubits():
    c = parse_qasm("OPENQASM 2.0;\nqreg q[3];\nbarrier;\n")
    assert c.ops[0].kind == "barrier"
    assert c.ops[0].qubits == (0, 1, 2)


def test_aliases_map_to_canonical_kinds():
    src = (
        "OPENQASM 2.0;\nqreg q[2];\n"
        "U(0.1,0.2,0.3) q[0];\nu(0.1,0.2,0.3) q[0];\nCX q[0],q[1];\n"
        "p(0.4) q[1];\ncu1(0.5) q[0],q[1];\n"
    )
    c = parse_qasm(src)
    assert [op.kind for op in c.ops] == ["u3", "u3", "cx", "u1", "cp"]


def test_angle_expressions():
    src = (
        "OPENQASM 2.0;\nqreg q[1];\n"
        "rz(pi/2) q[0];\nrz(-pi) q[0];\nrz(3*pi/4) q[0];\n"
        "rz(pi/2 + pi/4) q[0];\nrz((1+2)*pi) q[0];\nrz(1.5e-3) q[0];\nrz(.25) q[0];\n"
    )
    c = parse_qasm(src)
    got = [op.params[0] for op in c.ops]
    assert got == pytest.approx([pi / 2, -pi, 3 * pi / 4, 3 * pi / 4, 3 * pi, 1.5e-3, 0.25])


def test_bad_angle_expression_rejected():
    with pytest.raises(QasmError, match="angle"):
        parse_qasm("OPENQASM 2.0;\nqreg q[1];\nrz(pi foo) q[0];\n")
    with pytest.raises(QasmError, match="parenthes"):
        parse_qasm("OPENQASM 2.0;\nqreg q[1];\nrz((pi) q[0];\n")


@pytest.mark.parametrize(
    "stmt,word",
    [
        ("gate mygate a { h a; }", "gate"),
        ("if (c == 1) x q[0];", "if"),
        ("opaque noisy q;", "opaque"),
        ("reset q[0];", "reset"),
    ],
)
def test_forbidden_constructs_rejected_with_line(stmt, word):
    src = f"OPENQASM 2.0;\nqreg q[1];\ncreg c[1];\n{stmt}\n"
    with pytest.raises(QasmError, match=word) as info:
        parse_qasm(src)
    assert "line 4" in str(info.value)


def test_errors_carry_line_numbers():
    src = "OPENQASM 2.0;\nqreg q[2];\n\nh q[5];\n"
    with pytest.raises(QasmError, match="line 4"):
        parse_qasm(src)
    src = "OPENQASM 2.0;\nqreg q[2];\nblorp q[0];\n"
    with pytest.raises(QasmError, match="line 3.*blorp"):
        parse_qasm(src)


def test_index_out_of_range_and_undeclared_register():
    with pytest.raises(QasmError, match="out of range"):
        parse_qasm("OPENQASM 2.0;\nqreg q[2];\nh q[2];\n")
    with pytest.raises(QasmError, match="undeclared"):
        parse_qasm("OPENQASM 2.0;\nqreg q[2];\nh r[0];\n")


def test_redeclared_register_rejected():
    with pytest.raises(QasmError, match="redeclared"):
        parse_qasm("OPENQASM 2.0;\nqreg q[2];\nqreg q[3];\n")


def test_duplicate_qubits_rejected():
    with pytest.raises(QasmError, match="duplicate"):
        parse_qasm("OPENQASM 2.0;\nqreg q[2];\ncx q[0],q[0];\n")


def test_comments_and_whitespace_ignored():
    src = "// header comment\nOPENQASM 2.0; // trailing\n\n  qreg q[1];\n\th q[0]; // gate\n"
    c = parse_qasm(src)
    assert [op.kind for op in c.ops] == ["h"]


def test_param_count_mismatch():
    with pytest.raises(QasmError, match="parameter"):
        parse_qasm("OPENQASM 2.0;\nqreg q[1];\nrz q[0];\n")
    with pytest.raises(QasmError, match="parameter"):
        parse_qasm("OPENQASM 2.0;\nqreg q[1];\nh(0.5) q[0];\n")


def test_emit_is_normalized():
    text = to_qasm(parse_qasm(GHZ3))
    lines = text.splitlines()
    assert lines[0] == "OPENQASM 2.0;"
    assert lines[1] == 'include "qelib1.inc";'
    assert lines[2] == "qreg q[3];"
    assert lines[3] == "creg c[3];"
    assert "h q[0];" in lines
    assert "measure q[2] -> c[2];" in lines


def test_round_trip_random_circuits_exact():
    # emitted angles use repr(), so a reparse is bit-exact
    for i in range(25):
        c = random_circuit(2 + i % 6, seed=1000 + i, variant=i)
        back = parse_qasm(to_qasm(c), name=c.name)
        assert back.num_qubits == c.num_qubits
        assert back.num_clbits == c.num_clbits
        assert back.ops == c.ops


def test_round_trip_angle_bits():
    angles = np.random.default_rng(5).uniform(-4 * pi, 4 * pi, size=50)
    src = "OPENQASM 2.0;\nqreg q[1];\n" + "".join(f"rz({float(a)!r}) q[0];\n" for a in angles)
    c = parse_qasm(src)
    assert [op.params[0] for op in c.ops] == list(angles)
