"""OpenQASM 2.0 subset parser and normalized emitter.

Supported statements: the version header, the standard include, qreg/creg
declarations, standard-header gate applications, measure, and barrier.
Registers are flattened to global indices in declaration order. Angle
expressions are evaluated to doubles at parse time (pi, + - * /, parentheses,
unary minus). User-defined gates, if, opaque, and reset are rejected by name.
"""
from __future__ import annotations

import re
from math import pi

from .circuit import (
    BARRIER,
    GATE_SIGNATURES,
    MEASURE,
    Circuit,
    Instruction,
    barrier,
    gate,
    measure,
    validate,
)


class QasmError(ValueError):
    """Parse failure, carrying the 1-based source line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


# source-name aliases accepted on input; emission always uses canonical kinds
_ALIASES = {"u": "u3", "U": "u3", "CX": "cx", "cu1": "cp", "p": "u1"}

_FORBIDDEN = ("gate", "if", "opaque", "reset")

_TOKEN_RE = re.compile(r"\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?|pi|[+\-*/()]")
_ARG_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\[(\d+)\])?$")
_DECL_RE = re.compile(r"^(qreg|creg)\s+([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]$")


def _eval_angle(text: str, line: int) -> float:
    """Recursive-descent evaluation of a constant angle expression."""
    tokens = _TOKEN_RE.findall(text)
    if "".join(tokens).replace(" ", "") != re.sub(r"\s+", "", text):
        raise QasmError(f"bad angle expression {text!r}", line)
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take() -> str:
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def atom() -> float:
        tok = peek()
        if tok is None:
            raise QasmError(f"truncated angle expression {text!r}", line)
        if tok == "(":
            take()
            value = expr()
            if peek() != ")":
                raise QasmError(f"unbalanced parentheses in {text!r}", line)
            take()
            return value
        if tok == "pi":
            take()
            return pi
        if tok in "+-":
            take()
            return atom() if tok == "+" else -atom()
        try:
            return float(take())
        except ValueError:
            raise QasmError(f"bad token {tok!r} in angle expression", line) from None

    def term() -> float:
        value = atom()
        while peek() in ("*", "/"):
            op = take()
            rhs = atom()
            value = value * rhs if op == "*" else value / rhs
        return value

    def expr() -> float:
        value = term()
        while peek() in ("+", "-"):
            op = take()
            rhs = term()
            value = value + rhs if op == "+" else value - rhs
        return value

    result = expr()
    if pos != len(tokens):
        raise QasmError(f"trailing tokens in angle expression {text!r}", line)
    return result


def _strip_comments(source: str) -> str:
    return "\n".join(l.split("//", 1)[0] for l in source.splitlines())


def parse_qasm(source: str, name: str = "") -> Circuit:
    """Parse OpenQASM 2.0 text into a validated Circuit."""
    text = _strip_comments(source)

    for word in _FORBIDDEN:
        m = re.search(rf"(^|[;\s]){word}\b", text)
        if m:
            line = text.count("\n", 0, m.start() + len(m.group(1))) + 1
            raise QasmError(f"unsupported construct '{word}'", line)

    # statements end with ';'; line numbers recovered from offsets
    statements: list[tuple[str, int]] = []
    start = 0
    for m in re.finditer(";", text):
        stmt = text[start:m.start()].strip()
        if stmt:
            statements.append((stmt, text.count("\n", 0, start) + 1 + _leading_newlines(text, start, m.start())))
        start = m.end()
    tail = text[start:].strip()
    if tail:
        raise QasmError(f"statement missing ';': {tail!r}", text.count("\n", 0, start) + 1)

    if not statements or not re.match(r"^OPENQASM\s+2\.0$", statements[0][0]):
        raise QasmError("expected 'OPENQASM 2.0;' header", statements[0][1] if statements else 1)
    body = statements[1:]
    if body and re.match(r"^include\s+\"qelib1\.inc\"$", body[0][0]):
        body = body[1:]

    qregs: dict[str, tuple[int, int]] = {}  # name -> (offset, size)
    cregs: dict[str, tuple[int, int]] = {}
    num_qubits = 0
    num_clbits = 0
    ops: list[Instruction] = []

    def resolve(arg: str, regs: dict[str, tuple[int, int]], what: str, line: int) -> list[int]:
        m = _ARG_RE.match(arg.strip())
        if not m:
            raise QasmError(f"bad {what} argument {arg.strip()!r}", line)
        reg, idx = m.group(1), m.group(2)
        if reg not in regs:
            raise QasmError(f"undeclared {what} register {reg!r}", line)
        offset, size = regs[reg]
        if idx is None:
            return [offset + i for i in range(size)]
        i = int(idx)
        if i >= size:
            raise QasmError(f"index {i} out of range for {reg}[{size}]", line)
        return [offset + i]

    for stmt, line in body:
        m = _DECL_RE.match(stmt)
        if m:
            which, reg, size = m.group(1), m.group(2), int(m.group(3))
            if size < 1:
                raise QasmError(f"register {reg!r} must have positive size", line)
            if reg in qregs or reg in cregs:
                raise QasmError(f"register {reg!r} redeclared", line)
            if which == "qreg":
                qregs[reg] = (num_qubits, size)
                num_qubits += size
            else:
                cregs[reg] = (num_clbits, size)
                num_clbits += size
            continue

        if stmt.startswith("include"):
            raise QasmError(f"unsupported include: {stmt!r}", line)

        if stmt.startswith("measure"):
            m = re.match(r"^measure\s+(.+?)\s*->\s*(.+)$", stmt)
            if not m:
                raise QasmError(f"bad measure statement {stmt!r}", line)
            qs = resolve(m.group(1), qregs, "quantum", line)
            cs = resolve(m.group(2), cregs, "classical", line)
            if len(qs) != len(cs):
                raise QasmError("measure arity mismatch between registers", line)
            ops.extend(measure(q, c) for q, c in zip(qs, cs))
            continue

        if stmt == "barrier" or stmt.startswith("barrier ") or stmt.startswith("barrier\t"):
            rest = stmt[len("barrier"):].strip()
            if not rest:
                qs = list(range(num_qubits))
            else:
                qs = []
                for arg in rest.split(","):
                    qs.extend(resolve(arg, qregs, "quantum", line))
            if not qs:
                raise QasmError("barrier on empty register set", line)
            ops.append(barrier(qs))
            continue

        raw_kind, raw_params, raw_args = _split_gate_statement(stmt, line)
        kind = _ALIASES.get(raw_kind, raw_kind)
        if kind not in GATE_SIGNATURES:
            raise QasmError(f"unknown gate {raw_kind!r}", line)
        arity, nparams = GATE_SIGNATURES[kind]
        params = []
        if raw_params is not None:
            parts = _split_params(raw_params)
            params = [_eval_angle(p, line) for p in parts if p.strip()]
        if len(params) != nparams:
            raise QasmError(f"{raw_kind} expects {nparams} parameter(s), got {len(params)}", line)
        args = [a for a in raw_args.split(",") if a.strip()]
        if len(args) != arity:
            raise QasmError(f"{raw_kind} expects {arity} argument(s), got {len(args)}", line)
        groups = [resolve(a, qregs, "quantum", line) for a in args]
        if arity == 1:
            # whole-register form broadcasts a single-qubit gate
            for q in groups[0]:
                ops.append(gate(kind, (q,), params))
        else:
            if any(len(g) != 1 for g in groups):
                raise QasmError("register broadcast is only supported for single-qubit gates", line)
            qs = tuple(g[0] for g in groups)
            if len(set(qs)) != len(qs):
                raise QasmError(f"{raw_kind} applied to duplicate qubits", line)
            ops.append(gate(kind, qs, params))

    if num_qubits == 0:
        raise QasmError("no qreg declared", 1)
    circuit = Circuit(num_qubits, num_clbits, tuple(ops), name)
    validate(circuit)
    return circuit


def _split_gate_statement(stmt: str, line: int) -> tuple[str, str | None, str]:
    """Split ``name(params) args`` with paren-aware parameter extraction
    (angle expressions may nest parentheses)."""
    m = re.match(r"^([A-Za-z_][A-Za-z0-9_]*)\s*", stmt)
    if not m:
        raise QasmError(f"unparseable statement {stmt!r}", line)
    rest = stmt[m.end():]
    raw_params = None
    if rest.startswith("("):
        depth = 0
        for i, ch in enumerate(rest):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0:
                    break
        else:
            raise QasmError(f"unbalanced parentheses in {stmt!r}", line)
        raw_params = rest[1:i]
        rest = rest[i + 1:]
    return m.group(1), raw_params, rest.strip()


def _leading_newlines(text: str, start: int, end: int) -> int:
    # statements may begin after newlines that sit between ';' and the text
    segment = text[start:end]
    prefix = segment[: len(segment) - len(segment.lstrip())]
    return prefix.count("\n")


def _split_params(raw: str) -> list[str]:
    """Split a parameter list on commas not nested in parentheses."""
    parts, depth, cur = [], 0, []
    for ch in raw:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _fmt(value: float) -> str:
    return repr(value)


def to_qasm(circuit: Circuit) -> str:
    """Emit normalized OpenQASM 2.0: flattened registers named q and c."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.num_qubits}];"]
    if circuit.num_clbits:
        lines.append(f"creg c[{circuit.num_clbits}];")
    for op in circuit.ops:
        args = ",".join(f"q[{q}]" for q in op.qubits)
        if op.kind == MEASURE:
            lines.append(f"measure q[{op.qubits[0]}] -> c[{op.clbit}];")
        elif op.kind == BARRIER:
            lines.append(f"barrier {args};")
        elif op.params:
            lines.append(f"{op.kind}({','.join(_fmt(p) for p in op.params)}) {args};")
        else:
            lines.append(f"{op.kind} {args};")
    return "\n".join(lines) + "\n"
