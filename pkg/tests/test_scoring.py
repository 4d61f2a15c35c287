from math import log

import pytest

from qcpredict.circuit import Circuit, gate, measure
from qcpredict.compiler import CompiledResult, compile_circuit, parse_option
from qcpredict.devices import Calibration, DeviceModel
from qcpredict.scoring import (
    INFEASIBLE,
    CalibrationError,
    EvalScore,
    evaluate_score,
    normalize_scores,
    rank_options,
    ranks_from_values,
)


def _toy_device():
    coupling = frozenset({(0, 1), (1, 0)})
    gate_fid = {
        ("x", (0,)): 0.99,
        ("x", (1,)): 0.99,
        ("cx", (0, 1)): 0.98,
        ("cx", (1, 0)): 0.98,
    }
    readout = {0: 0.97, 1: 0.96}
    return DeviceModel(
        "toy", "superconducting", 2, coupling,
        frozenset({"x", "cx", "measure"}), Calibration(gate_fid, readout),
    )


def _result(device, ops, clbits=0):
    c = Circuit(device.num_qubits, clbits, tuple(ops), "c")
    return CompiledResult(c, {q: q for q in range(device.num_qubits)}, parse_option("dev8/A/O0"))


def test_empty_circuit_scores_one():
    score = evaluate_score(_result(_toy_device(), []), _toy_device())
    assert score == EvalScore(1.0, True)


def test_hand_computed_product():
    device = _toy_device()
    score = evaluate_score(_result(device, [gate("x", (0,)), gate("x", (1,)), gate("cx", (0, 1))]), device)
    assert score.value == pytest.approx(0.99 * 0.99 * 0.98, abs=1e-15)
    assert score.feasible


def test_readout_multiplies_in():
    device = _toy_device()
    ops = [gate("x", (0,)), measure(0, 0), measure(1, 1)]
    score = evaluate_score(_result(device, ops, clbits=2), device)
    assert score.value == pytest.approx(0.99 * 0.97 * 0.96, abs=1e-15)


def test_log_space_matches_direct_product():
    device = _toy_device()
    ops = [gate("x", (0,))] * 50 + [gate("cx", (0, 1))] * 30
    score = evaluate_score(_result(device, ops), device)
    direct = (0.99 ** 50) * (0.98 ** 30)
    assert abs(score.value - direct) <= 1e-12


def test_long_products_do_not_underflow_to_garbage():
    device = _toy_device()
    ops = [gate("x", (0,))] * 20000
    score = evaluate_score(_result(device, ops), device)
    assert score.value == pytest.approx(2.718281828 ** (20000 * log(0.99)), rel=1e-9)
    assert score.value >= 0.0


def test_none_result_is_infeasible():
    assert evaluate_score(None, _toy_device()) is INFEASIBLE
    assert INFEASIBLE.value == 0.0 and not INFEASIBLE.feasible


def test_missing_calibration_entry_raises():
    device = _toy_device()
    with pytest.raises(CalibrationError, match="x"):
        evaluate_score(_result(device, [gate("x", (0,), ())._replace(qubits=(5,))]), device)


def test_barriers_are_free():
    device = _toy_device()
    from qcpredict.circuit import barrier

    with_b = _result(device, [gate("x", (0,)), barrier((0, 1)), gate("x", (0,))])
    without = _result(device, [gate("x", (0,)), gate("x", (0,))])
    assert evaluate_score(with_b, device).value == evaluate_score(without, device).value


def _ghz(n):
    ops = [gate("h", (0,))] + [gate("cx", (i, i + 1)) for i in range(n - 1)]
    ops += [measure(i, i) for i in range(n)]
    return Circuit(n, n, tuple(ops), f"ghz{n}")


def test_rank_options_orders_by_score(devices, options):
    ranking = rank_options(_ghz(3), options, devices)
    values = ranking.score_values()
    assert len(values) == 30
    assert all(v > 0.0 for v in values)  # 3 qubits fit everywhere
    best = ranking.best
    assert ranking.scores[best].value == max(values)
    assert ranking.rank_of[best] == 1
    assert sorted(ranking.rank_of.values()) == list(range(1, 31))
    # order is the sorted view
    ordered = [ranking.scores[o].value for o in ranking.order]
    assert ordered == sorted(ordered, reverse=True)


def test_too_wide_scores_zero_without_compiling(devices, options):
    ranking = rank_options(_ghz(50), options, devices)
    feasible = [o for o in options if ranking.scores[o].feasible]
    # only the two largest devices fit 50 qubits: 6 options each
    assert len(feasible) == 12
    assert {o.device_id for o in feasible} == {"dev80", "dev127"}
    for o in options:
        if not ranking.scores[o].feasible:
            assert ranking.scores[o] == INFEASIBLE


def test_tie_breaks_keep_option_order(devices, options):
    c = Circuit(2, 0, (), "empty")
    ranking = rank_options(c, options, devices)
    # every option scores 1.0 (no gates, no measures), first option wins
    assert set(ranking.score_values()) == {1.0}
    assert ranking.order == tuple(options)
    assert ranking.best.option_id == "dev8/A/O0"


def test_zero_timeout_marks_everything_infeasible(devices, options):
    ranking = rank_options(_ghz(3), options, devices, timeout=0.0)
    assert all(s == INFEASIBLE for s in ranking.scores.values())
    assert normalize_scores(ranking) == {o: 0.0 for o in options}


def test_rank_options_rejects_empty_or_unknown(devices):
    with pytest.raises(ValueError, match="no options"):
        rank_options(_ghz(2), [], devices)
    with pytest.raises(ValueError, match="unknown device"):
        rank_options(_ghz(2), [parse_option("nope/A/O0")], devices)


def test_normalize_scores(devices, options):
    ranking = rank_options(_ghz(3), options, devices)
    normalized = normalize_scores(ranking)
    assert normalized[ranking.best] == 1.0
    assert all(0.0 <= v <= 1.0 for v in normalized.values())


def test_scores_agree_with_manual_recompute(devices, options):
    fleet = {d.id: d for d in devices}
    c = _ghz(3)
    ranking = rank_options(c, options, devices)
    for option in options[:8]:
        result = compile_circuit(c, option, fleet)
        again = evaluate_score(result, fleet[option.device_id])
        assert ranking.scores[option] == again


def test_ranks_from_values():
    assert ranks_from_values((0.9, 0.5, 0.7)) == (1, 3, 2)
    # ties keep position order
    assert ranks_from_values((0.5, 0.9, 0.5, 0.0)) == (2, 1, 3, 4)
    assert ranks_from_values(()) == ()
    assert ranks_from_values((0.0, 0.0)) == (1, 2)
