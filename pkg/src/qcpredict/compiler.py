"""Compilation pipeline: placement, SWAP routing, native lowering, optimization.

Each compilation option is one leaf of the two-family tree: family A keeps the
trivial placement and varies the optimization level O0-O3; family B picks a
placement strategy (line or graph) and runs a fixed O1 cleanup. Every stage is
deterministic: all tie-breaks resolve toward the lowest index.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import pi

from .circuit import (
    BARRIER,
    GATE_SIGNATURES,
    MEASURE,
    Circuit,
    Instruction,
    interaction_graph,
)
from .devices import DeviceModel


class CompileError(ValueError):
    """Compilation cannot proceed."""


class InfeasibleError(CompileError):
    """Circuit needs more qubits than the target device has."""


OPT_LEVELS = ("O0", "O1", "O2", "O3")
PLACEMENTS = ("line", "graph")
FAMILY_A = "A"
FAMILY_B = "B"


@dataclass(frozen=True)
class CompilationOption:
    """One point of the option tree: device x family x setting."""

    device_id: str
    family: str
    setting: str

    def __post_init__(self) -> None:
        if self.family == FAMILY_A:
            if self.setting not in OPT_LEVELS:
                raise CompileError(f"family A setting must be one of {OPT_LEVELS}, got {self.setting!r}")
        elif self.family == FAMILY_B:
            if self.setting not in PLACEMENTS:
                raise CompileError(f"family B setting must be one of {PLACEMENTS}, got {self.setting!r}")
        else:
            raise CompileError(f"unknown family {self.family!r}")

    @property
    def option_id(self) -> str:
        return f"{self.device_id}/{self.family}/{self.setting}"


def parse_option(text: str) -> CompilationOption:
    parts = text.split("/")
    if len(parts) != 3:
        raise CompileError(f"option id must look like dev8/A/O3, got {text!r}")
    return CompilationOption(parts[0], parts[1], parts[2])


def enumerate_options(devices: list[DeviceModel]) -> list[CompilationOption]:
    """All options in canonical order: device order x (A:O0..O3, B:line, B:graph)."""
    if not devices:
        raise CompileError("empty device list")
    options = []
    for d in devices:
        for level in OPT_LEVELS:
            options.append(CompilationOption(d.id, FAMILY_A, level))
        for placement in PLACEMENTS:
            options.append(CompilationOption(d.id, FAMILY_B, placement))
    return options


@dataclass
class CompiledResult:
    circuit: Circuit
    layout: dict[int, int]  # logical -> physical after all routing swaps
    option: CompilationOption
    stats: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# decomposition tables (all identities verified against the dense simulator)

# 1q gate -> u3 angles, up to global phase
def _u3_angles(kind: str, params: tuple[float, ...]) -> tuple[float, float, float]:
    if kind == "u3":
        return params  # type: ignore[return-value]
    if kind == "u2":
        return (pi / 2, params[0], params[1])
    if kind == "rx":
        return (params[0], -pi / 2, pi / 2)
    if kind == "ry":
        return (params[0], 0.0, 0.0)
    table = {
        "x": (pi, 0.0, pi),
        "y": (pi, pi / 2, pi / 2),
        "h": (pi / 2, 0.0, pi),
        "sx": (pi / 2, -pi / 2, pi / 2),
        "sxdg": (pi / 2, pi / 2, -pi / 2),
    }
    return table[kind]


# diagonal 1q gates collapse to a single rz, phase-free
_DIAG_ANGLE = {
    "z": pi,
    "s": pi / 2,
    "sdg": -pi / 2,
    "t": pi / 4,
    "tdg": -pi / 4,
}


def _g(kind: str, qubits: tuple[int, ...], *params: float) -> Instruction:
    return Instruction(kind, qubits, params)


def _two_qubit_rule(op: Instruction) -> list[Instruction]:
    """Rewrite a non-native two-qubit gate over {1q, cx}."""
    a, b = op.qubits
    kind = op.kind
    if kind == "cy":
        return [_g("sdg", (b,)), _g("cx", (a, b)), _g("s", (b,))]
    if kind == "cz":
        return [_g("h", (b,)), _g("cx", (a, b)), _g("h", (b,))]
    if kind == "ch":
        return [
            _g("h", (b,)), _g("sdg", (b,)), _g("cx", (a, b)), _g("h", (b,)), _g("t", (b,)),
            _g("cx", (a, b)), _g("t", (b,)), _g("h", (b,)), _g("s", (b,)), _g("x", (b,)), _g("s", (a,)),
        ]
    if kind == "swap":
        return [_g("cx", (a, b)), _g("cx", (b, a)), _g("cx", (a, b))]
    if kind == "crx":
        t = op.params[0]
        return [
            _g("h", (b,)), _g("rz", (b,), t / 2), _g("cx", (a, b)),
            _g("rz", (b,), -t / 2), _g("cx", (a, b)), _g("h", (b,)),
        ]
    if kind == "cry":
        t = op.params[0]
        return [_g("ry", (b,), t / 2), _g("cx", (a, b)), _g("ry", (b,), -t / 2), _g("cx", (a, b))]
    if kind == "crz":
        t = op.params[0]
        return [_g("rz", (b,), t / 2), _g("cx", (a, b)), _g("rz", (b,), -t / 2), _g("cx", (a, b))]
    if kind == "cp":
        t = op.params[0]
        return [
            _g("u1", (a,), t / 2), _g("cx", (a, b)), _g("u1", (b,), -t / 2),
            _g("cx", (a, b)), _g("u1", (b,), t / 2),
        ]
    if kind == "cu3":
        t, p, l = op.params
        return [
            _g("u1", (a,), (l + p) / 2), _g("u1", (b,), (l - p) / 2), _g("cx", (a, b)),
            _g("u3", (b,), -t / 2, 0.0, -(p + l) / 2), _g("cx", (a, b)), _g("u3", (b,), t / 2, p, 0.0),
        ]
    if kind == "rzz":
        return [_g("cx", (a, b)), _g("rz", (b,), op.params[0]), _g("cx", (a, b))]
    if kind == "rxx":
        return [
            _g("h", (a,)), _g("h", (b,)), _g("cx", (a, b)), _g("rz", (b,), op.params[0]),
            _g("cx", (a, b)), _g("h", (a,)), _g("h", (b,)),
        ]
    raise CompileError(f"no lowering rule for {kind!r}")


def _three_qubit_rule(op: Instruction) -> list[Instruction]:
    a, b, c = op.qubits
    if op.kind == "ccx":
        return [
            _g("h", (c,)), _g("cx", (b, c)), _g("tdg", (c,)), _g("cx", (a, c)), _g("t", (c,)),
            _g("cx", (b, c)), _g("tdg", (c,)), _g("cx", (a, c)), _g("t", (b,)), _g("t", (c,)),
            _g("h", (c,)), _g("cx", (a, b)), _g("t", (a,)), _g("tdg", (b,)), _g("cx", (a, b)),
        ]
    if op.kind == "cswap":
        return [_g("cx", (c, b)), *_three_qubit_rule(_g("ccx", (a, b, c))), _g("cx", (c, b))]
    raise CompileError(f"no lowering rule for {op.kind!r}")


def expand_three_qubit(circuit: Circuit) -> Circuit:
    """Rewrite ccx/cswap over one- and two-qubit gates (routing needs pairs)."""
    if not any(len(op.qubits) == 3 and op.kind in GATE_SIGNATURES for op in circuit.ops):
        return circuit
    out: list[Instruction] = []
    for op in circuit.ops:
        if op.kind in GATE_SIGNATURES and len(op.qubits) == 3:
            out.extend(_three_qubit_rule(op))
        else:
            out.append(op)
    return circuit.with_ops(tuple(out))


_EPS = 1e-12


def _lower_1q(op: Instruction, device: DeviceModel, out: list[Instruction]) -> None:
    native = device.native_gates
    kind = op.kind
    if kind in _DIAG_ANGLE or kind in ("rz", "u1"):
        angle = op.params[0] if kind in ("rz", "u1") else _DIAG_ANGLE[kind]
        if abs(angle) > _EPS:
            out.append(_g("rz", op.qubits, angle))
        return
    theta, phi, lam = _u3_angles(kind, op.params)
    q = op.qubits
    if "sx" in native and "x" in native:
        if abs(theta) < _EPS:
            if abs(phi + lam) > _EPS:
                out.append(_g("rz", q, phi + lam))
            return
        out.append(_g("rz", q, lam))
        out.append(_g("sx", q))
        out.append(_g("rz", q, theta + pi))
        out.append(_g("sx", q))
        out.append(_g("rz", q, phi + pi))
        return
    if "rx" in native and "ry" in native:
        if abs(theta) < _EPS:
            if abs(phi + lam) > _EPS:
                out.append(_g("rz", q, phi + lam))
            return
        if abs(lam) > _EPS:
            out.append(_g("rz", q, lam))
        out.append(_g("ry", q, theta))
        if abs(phi) > _EPS:
            out.append(_g("rz", q, phi))
        return
    raise CompileError(f"no single-qubit lowering onto native set {sorted(native)}")


def _lower_cx(op: Instruction, device: DeviceModel, out: list[Instruction]) -> None:
    if "rxx" in device.native_gates:
        a, b = op.qubits
        out.append(_g("ry", (a,), pi / 2))
        out.append(_g("rxx", (a, b), pi / 2))
        out.append(_g("rx", (a,), -pi / 2))
        out.append(_g("rx", (b,), -pi / 2))
        out.append(_g("ry", (a,), -pi / 2))
        return
    raise CompileError(f"no cx lowering onto native set {sorted(device.native_gates)}")


def _lower(op: Instruction, device: DeviceModel, out: list[Instruction]) -> None:
    kind = op.kind
    if kind == MEASURE:
        out.append(op)
        return
    if kind == BARRIER or kind == "id":
        # barriers are scheduling hints with no native counterpart; dropped here
        return
    if kind in device.native_gates:
        out.append(op)
        return
    arity = len(op.qubits)
    if arity == 1:
        _lower_1q(op, device, out)
    elif kind == "cx":
        _lower_cx(op, device, out)
    elif arity == 2:
        for sub in _two_qubit_rule(op):
            _lower(sub, device, out)
    else:
        for sub in _three_qubit_rule(op):
            _lower(sub, device, out)


def decompose_to_native(circuit: Circuit, device: DeviceModel) -> Circuit:
    """Rewrite every gate over the device's native set; native gates pass through."""
    out: list[Instruction] = []
    for op in circuit.ops:
        _lower(op, device, out)
    return circuit.with_ops(tuple(out))


# ---------------------------------------------------------------------------
# placement

_LINE_PATH_CACHE: dict[str, tuple[int, ...]] = {}


def _longest_greedy_path(device: DeviceModel) -> tuple[int, ...]:
    """Greedy simple path from every start, extending to the lowest-id neighbor."""
    cached = _LINE_PATH_CACHE.get(device.id)
    if cached is not None and len(cached) <= device.num_qubits:
        return cached
    best: tuple[int, ...] = ()
    for start in range(device.num_qubits):
        path = [start]
        visited = {start}
        while True:
            nxt = next((nb for nb in device.neighbors[path[-1]] if nb not in visited), None)
            if nxt is None:
                break
            path.append(nxt)
            visited.add(nxt)
        if len(path) > len(best):
            best = tuple(path)
        if len(best) == device.num_qubits:
            break
    _LINE_PATH_CACHE[device.id] = best
    return best


def place_trivial(circuit: Circuit, device: DeviceModel) -> dict[int, int]:
    return {q: q for q in range(circuit.num_qubits)}


def _degree_order(circuit: Circuit) -> list[int]:
    degree = [0] * circuit.num_qubits
    for a, b in interaction_graph(circuit):
        degree[a] += 1
        degree[b] += 1
    return sorted(range(circuit.num_qubits), key=lambda q: (-degree[q], q))


def place_line(circuit: Circuit, device: DeviceModel) -> tuple[dict[int, int], bool]:
    """Map logical qubits onto a coupling-graph path, busiest qubits first.

    Returns (layout, fell_back); when no long-enough path exists the trivial
    placement is used instead and flagged.
    """
    path = _longest_greedy_path(device)
    if len(path) < circuit.num_qubits:
        return place_trivial(circuit, device), True
    layout = {logical: path[i] for i, logical in enumerate(_degree_order(circuit))}
    return layout, False


def place_graph(circuit: Circuit, device: DeviceModel) -> dict[int, int]:
    """Greedy monomorphism of the interaction graph, heaviest edges first."""
    weight: dict[tuple[int, int], int] = {}
    for op in circuit.gates():
        if len(op.qubits) < 2:
            continue
        qs = op.qubits
        for i in range(len(qs)):
            for j in range(i + 1, len(qs)):
                e = (min(qs[i], qs[j]), max(qs[i], qs[j]))
                weight[e] = weight.get(e, 0) + 1
    edges = sorted(weight, key=lambda e: (-weight[e], e))

    layout: dict[int, int] = {}
    free = set(range(device.num_qubits))
    sorted_coupling = sorted(device.coupling)
    dist = device.distances

    def nearest_free(anchor: int) -> int:
        return min(free, key=lambda p: (dist[anchor][p], p))

    for a, b in edges:
        pa, pb = layout.get(a), layout.get(b)
        if pa is not None and pb is not None:
            continue
        if pa is None and pb is None:
            pair = next(((u, v) for u, v in sorted_coupling if u in free and v in free), None)
            if pair is None:
                pa = min(free)
                layout[a] = pa
                free.discard(pa)
                layout[b] = nearest_free(pa)
                free.discard(layout[b])
            else:
                layout[a], layout[b] = pair
                free.discard(pair[0])
                free.discard(pair[1])
            continue
        placed, missing = (pa, b) if pa is not None else (pb, a)
        target = next((nb for nb in device.neighbors[placed] if nb in free), None)
        if target is None:
            target = nearest_free(placed)
        layout[missing] = target
        free.discard(target)

    partners: dict[int, list[int]] = {q: [] for q in range(circuit.num_qubits)}
    for a, b in edges:
        partners[a].append(b)
        partners[b].append(a)
    for logical in range(circuit.num_qubits):
        if logical in layout:
            continue
        anchors = [layout[p] for p in partners[logical] if p in layout]
        if anchors:
            target = min(free, key=lambda p: (sum(dist[a][p] for a in anchors), p))
        else:
            target = min(free)
        layout[logical] = target
        free.discard(target)
    return layout


# ---------------------------------------------------------------------------
# routing

def route(circuit: Circuit, device: DeviceModel, layout: dict[int, int]) -> tuple[Circuit, dict[int, int], int]:
    """Insert swaps until every two-qubit gate sits on a coupled pair.

    Swaps move the first operand along a shortest path toward the second,
    stepping to the lowest-id next hop. Returns the routed circuit on the
    device-sized register, the final logical->physical map, and the swap count.
    """
    if len(set(layout.values())) != len(layout):
        raise CompileError("placement is not injective")
    cur = dict(layout)
    seat = {p: l for l, p in cur.items()}
    dist = device.distances
    neighbors = device.neighbors
    out: list[Instruction] = []
    swaps = 0
    for op in circuit.ops:
        if op.kind == MEASURE:
            out.append(Instruction(MEASURE, (cur[op.qubits[0]],), (), op.clbit))
            continue
        if op.kind == BARRIER:
            out.append(Instruction(BARRIER, tuple(sorted(cur[q] for q in op.qubits))))
            continue
        if len(op.qubits) == 1:
            out.append(Instruction(op.kind, (cur[op.qubits[0]],), op.params))
            continue
        if len(op.qubits) > 2:
            raise CompileError(f"route expects gates on at most two qubits; expand {op.kind} first")
        a, b = op.qubits
        pa, pb = cur[a], cur[b]
        while dist[pa][pb] > 1:
            hop = next((nb for nb in neighbors[pa] if dist[nb][pb] == dist[pa][pb] - 1), None)
            if hop is None:
                raise CompileError(f"qubits {pa} and {pb} are not connected on {device.id}")
            out.append(Instruction("swap", (pa, hop)))
            swaps += 1
            rider = seat.pop(pa)
            sitter = seat.pop(hop, None)
            seat[hop] = rider
            cur[rider] = hop
            if sitter is not None:
                seat[pa] = sitter
                cur[sitter] = pa
            pa = hop
        out.append(Instruction(op.kind, (pa, pb), op.params))
    routed = Circuit(device.num_qubits, circuit.num_clbits, tuple(out), circuit.name)
    return routed, cur, swaps


# ---------------------------------------------------------------------------
# optimization ladder

_SELF_INVERSE = frozenset({"x", "y", "z", "h", "cx", "cy", "cz", "ch", "swap", "ccx", "cswap"})
_ROTATIONS = frozenset({"rx", "ry", "rz", "u1", "crx", "cry", "crz", "cp", "rxx", "rzz"})

# per-qubit commutation basis: gates block-diagonal in the same basis on every
# shared qubit commute; None marks positions with no single basis
_BASIS: dict[str, tuple] = {
    "x": ("x",), "sx": ("x",), "sxdg": ("x",), "rx": ("x",),
    "y": ("y",), "ry": ("y",),
    "z": ("z",), "s": ("z",), "sdg": ("z",), "t": ("z",), "tdg": ("z",), "rz": ("z",), "u1": ("z",),
    "cx": ("z", "x"), "cy": ("z", "y"), "cz": ("z", "z"), "cp": ("z", "z"), "crz": ("z", "z"),
    "crx": ("z", "x"), "cry": ("z", "y"), "cu3": ("z", None), "ch": ("z", None),
    "rxx": ("x", "x"), "rzz": ("z", "z"), "ccx": ("z", "z", "x"),
}


def _commutes(a: Instruction, b: Instruction) -> bool:
    basis_a = _BASIS.get(a.kind)
    basis_b = _BASIS.get(b.kind)
    if basis_a is None or basis_b is None:
        return False
    for q in set(a.qubits) & set(b.qubits):
        xa = basis_a[a.qubits.index(q)]
        xb = basis_b[b.qubits.index(q)]
        if xa is None or xb is None or xa != xb:
            return False
    return True


def _adjacent_pass(ops: list[Instruction], fuse: bool) -> tuple[list[Instruction], bool]:
    """One scan of adjacent cancellation, identity dropping, optional fusion."""
    out: list[Instruction | None] = []
    last: dict[int, int | None] = {}
    changed = False
    for op in ops:
        if op.kind in GATE_SIGNATURES:
            if op.kind == "id" or (op.kind in _ROTATIONS and abs(op.params[0]) < _EPS):
                changed = True
                continue
            prev_idx = {last.get(q) for q in op.qubits}
            if len(prev_idx) == 1 and None not in prev_idx:
                k = prev_idx.pop()
                prev = out[k]
                if prev is not None and prev.kind == op.kind and prev.qubits == op.qubits:
                    if op.kind in _SELF_INVERSE:
                        out[k] = None
                        for q in op.qubits:
                            last[q] = None  # true predecessor unknown; next pass catches follow-ups
                        changed = True
                        continue
                    if fuse and op.kind in _ROTATIONS:
                        out[k] = prev._replace(params=(prev.params[0] + op.params[0],))
                        changed = True
                        continue
        out.append(op)
        idx = len(out) - 1
        for q in op.qubits:
            last[q] = idx
    return [op for op in out if op is not None], changed


def _commuting_pass(ops: list[Instruction]) -> tuple[list[Instruction], bool]:
    """Cancel or fuse gate pairs separated only by commuting neighbors."""
    per_qubit: dict[int, list[int]] = {}
    pos_of: dict[tuple[int, int], int] = {}
    for i, op in enumerate(ops):
        for q in op.qubits:
            chain = per_qubit.setdefault(q, [])
            pos_of[(i, q)] = len(chain)
            chain.append(i)

    alive = [True] * len(ops)
    params_now: dict[int, tuple[float, ...]] = {}
    changed = False

    for i, op in enumerate(ops):
        if not alive[i] or op.kind not in GATE_SIGNATURES:
            continue
        if op.kind not in _SELF_INVERSE and op.kind not in _ROTATIONS:
            continue
        my_params = params_now.get(i, op.params)
        ptr = {q: pos_of[(i, q)] + 1 for q in op.qubits}
        while True:
            cand = None
            for q in op.qubits:
                chain = per_qubit[q]
                p = ptr[q]
                while p < len(chain) and not alive[chain[p]]:
                    p += 1
                ptr[q] = p
                if p < len(chain):
                    j = chain[p]
                    cand = j if cand is None else min(cand, j)
            if cand is None:
                break
            other = ops[cand]
            if other.kind == op.kind and other.qubits == op.qubits:
                if op.kind in _SELF_INVERSE:
                    alive[i] = alive[cand] = False
                    changed = True
                    break
                merged = my_params[0] + params_now.get(cand, other.params)[0]
                alive[i] = False
                params_now[cand] = (merged,)
                changed = True
                break
            if _commutes(op, other):
                for q in op.qubits:
                    chain = per_qubit[q]
                    if ptr[q] < len(chain) and chain[ptr[q]] == cand:
                        ptr[q] += 1
                continue
            break

    if not changed:
        return ops, False
    result = []
    for i, op in enumerate(ops):
        if not alive[i]:
            continue
        if i in params_now:
            op = op._replace(params=params_now[i])
        result.append(op)
    return result, True


def _run_stage(ops: list[Instruction], fuse: bool, commute: bool) -> list[Instruction]:
    while True:
        ops, changed = _adjacent_pass(ops, fuse)
        if commute:
            ops, commuted = _commuting_pass(ops)
            changed = changed or commuted
        if not changed:
            return ops


def optimize(circuit: Circuit, level: str | int) -> Circuit:
    """Apply the graded cleanup ladder; levels build on each other, so gate
    counts never increase with the level."""
    if isinstance(level, str):
        if level not in OPT_LEVELS:
            raise CompileError(f"unknown optimization level {level!r}")
        level = OPT_LEVELS.index(level)
    if not 0 <= level <= 3:
        raise CompileError(f"unknown optimization level {level!r}")
    if level == 0:
        return circuit
    ops = _run_stage(list(circuit.ops), fuse=False, commute=False)
    if level >= 2:
        ops = _run_stage(ops, fuse=True, commute=False)
    if level >= 3:
        ops = _run_stage(ops, fuse=True, commute=True)
    return circuit.with_ops(tuple(ops))


# ---------------------------------------------------------------------------
# the full pipeline

def compile_circuit(
    circuit: Circuit, option: CompilationOption, devices: list[DeviceModel] | dict[str, DeviceModel]
) -> CompiledResult:
    """Run one option end to end: place, route, lower to native, optimize."""
    fleet = devices if isinstance(devices, dict) else {d.id: d for d in devices}
    device = fleet.get(option.device_id)
    if device is None:
        raise CompileError(f"unknown device {option.device_id!r}")
    if circuit.num_qubits > device.num_qubits:
        raise InfeasibleError(
            f"{circuit.num_qubits} qubits do not fit on {device.id} ({device.num_qubits} qubits)"
        )
    started = time.perf_counter()

    expanded = expand_three_qubit(circuit)
    fell_back = False
    if option.family == FAMILY_A:
        layout = place_trivial(expanded, device)
    elif option.setting == "line":
        layout, fell_back = place_line(expanded, device)
    else:
        layout = place_graph(expanded, device)

    routed, final_layout, swaps = route(expanded, device, layout)
    native = decompose_to_native(routed, device)
    level = option.setting if option.family == FAMILY_A else "O1"
    optimized = optimize(native, level)

    stats = {
        "swaps_inserted": swaps,
        "native_gates": optimized.num_gates(),
        "compile_seconds": time.perf_counter() - started,
        "placement_fallback": fell_back,
    }
    return CompiledResult(optimized, final_layout, option, stats)


def is_device_legal(circuit: Circuit, device: DeviceModel) -> tuple[bool, str]:
    """Check the compiled-circuit contract: native kinds on coupled pairs."""
    for i, op in enumerate(circuit.ops):
        if op.kind == BARRIER:
            continue
        if op.kind == MEASURE:
            continue
        if op.kind not in device.native_gates:
            return False, f"op {i}: {op.kind} is not native to {device.id}"
        if len(op.qubits) == 2 and not device.coupled(*op.qubits):
            return False, f"op {i}: {op.kind} on uncoupled pair {op.qubits}"
        if len(op.qubits) > 2:
            return False, f"op {i}: {op.kind} spans more than two qubits"
    return True, ""
