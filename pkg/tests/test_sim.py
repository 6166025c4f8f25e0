"""Cell-level simulator: closed-loop behaviour, conservation, determinism,
trace analysis helpers."""

import math

import pytest

from gwfair.errors import ConfigError, EmptyTraceError
from gwfair.network import Link, NetworkSpec, Session
from gwfair.oracle import solve
from gwfair.sim import (CELL_BITS, RM_EVERY, US_PER_KM, Engine, SourceModel,
                        Trace, build, convergence_time, steady_state_acr,
                        steady_state_rates, utilization)

LINE = 149.76


def _net(n=3, capacity=LINE, length_km=100.0, mcrs=None):
    mcrs = mcrs or (0.0,) * n
    sessions = [Session(id=f"s{i + 1}", route=("l1",), mcr=mcrs[i]) for i in range(n)]
    return NetworkSpec(links=[Link("l1", capacity, length_km)], sessions=sessions)


def _greedy_models(net, icr=30.0):
    return {s.id: SourceModel(kind="greedy", icr_mbps=icr) for s in net.sessions}


# -- closed loop -------------------------------------------------------------------


def test_closed_loop_settles_on_the_solver_allocation():
    net = _net(3, mcrs=(10.0, 30.0, 50.0))
    trace = build(net, _greedy_models(net)).run(200.0)
    target = solve(net).rates
    steady = steady_state_rates(trace)
    for sid, want in target.items():
        assert steady[sid] == pytest.approx(want, abs=max(0.02 * want, 1.0))
    assert convergence_time(trace, target) is not None


def test_allowed_rate_respects_floor_and_peak():
    net = _net(3, mcrs=(10.0, 30.0, 50.0))
    models = {s.id: SourceModel(kind="greedy", icr_mbps=s.mcr + 10.0, pcr_mbps=LINE)
              for s in net.sessions}
    trace = build(net, models).run(120.0)
    for s in net.sessions:
        for acr in trace.acr[s.id]:
            assert s.mcr - 1e-9 <= acr <= LINE + 1e-9


def test_transient_source_is_silent_outside_its_window():
    net = _net(2)
    models = {"s1": SourceModel(kind="greedy", icr_mbps=30.0),
              "s2": SourceModel(kind="transient", icr_mbps=30.0,
                                start_ms=30.0, stop_ms=60.0)}
    trace = build(net, models).run(100.0)
    for t, rate in zip(trace.times, trace.rate["s2"]):
        if t < 30.0 or t > 61.0:
            assert rate == 0.0
    on = [r for t, r in zip(trace.times, trace.rate["s2"]) if 31.0 <= t <= 59.0]
    assert on and all(r > 0.0 for r in on)


def test_capped_source_never_sends_above_its_demand():
    net = _net(2)
    models = {"s1": SourceModel(kind="capped", icr_mbps=10.0, cap_mbps=10.0),
              "s2": SourceModel(kind="greedy", icr_mbps=30.0)}
    trace = build(net, models).run(150.0)
    assert max(trace.rate["s1"]) <= 10.0 + 1e-9
    # the unused headroom flows to the other source
    assert steady_state_rates(trace)["s2"] == pytest.approx(LINE - 10.0, abs=2.0)
    # while the raw allowed rate is free to sit higher than the demand
    assert steady_state_acr(trace)["s1"] > 10.0


def test_cell_conservation_at_every_sample():
    net = NetworkSpec(
        links=[Link("l1", 100.0, 200.0), Link("l2", 50.0, 50.0)],
        sessions=[Session(id="x", route=("l1", "l2")),
                  Session(id="y", route=("l1",)),
                  Session(id="z", route=("l2",))])
    models = {sid: SourceModel(kind="greedy", icr_mbps=20.0) for sid in ("x", "y", "z")}
    engine = build(net, models)
    trace = engine.run(80.0)
    # cells leave a wire within one propagation delay, so the in-flight
    # count is bounded by what all wires can hold at line rate
    wire_room = sum(p.prop_us / p.tx_us + 1 for p in engine.ports)
    for _, emitted, delivered, buffered in trace.balance:
        in_flight = emitted - delivered - buffered
        assert 0 <= in_flight <= wire_room
    final_emitted, final_delivered = trace.balance[-1][1], trace.balance[-1][2]
    assert final_delivered > 0.9 * final_emitted


def test_deterministic_repeat_runs():
    def one_trace():
        net = _net(3, mcrs=(10.0, 30.0, 50.0))
        return build(net, _greedy_models(net)).run(60.0)

    a, b = one_trace(), one_trace()
    assert a.times == b.times
    assert a.acr == b.acr
    assert a.rate == b.rate
    assert a.queue == b.queue
    assert a.util == b.util
    assert a.load_factor == b.load_factor
    assert a.balance == b.balance


def test_rm_cadence_and_cell_size_constants():
    assert CELL_BITS == 424
    assert RM_EVERY == 32
    assert US_PER_KM == 5.0


# -- engine validation ---------------------------------------------------------


def test_engine_rejects_bad_setups():
    net = _net(2)
    models = _greedy_models(net)
    with pytest.raises(ConfigError):
        build(NetworkSpec(links=[Link("l1", LINE)], sessions=[]), {})
    with pytest.raises(ConfigError):
        build(net, {"s1": models["s1"]})  # s2 has no model
    extra = dict(models)
    extra["ghost"] = SourceModel()
    with pytest.raises(ConfigError):
        build(net, extra)
    with pytest.raises(ConfigError):
        build(net, models, sample_ms=0.0)


def test_engine_runs_once_and_needs_positive_duration():
    net = _net(2)
    engine = build(net, _greedy_models(net))
    with pytest.raises(ConfigError):
        engine.run(0.0)
    engine.run(10.0)
    with pytest.raises(ConfigError):
        engine.run(10.0)


def test_source_model_validation():
    with pytest.raises(ConfigError):
        SourceModel(kind="bursty")
    with pytest.raises(ConfigError):
        SourceModel(icr_mbps=0.0)
    with pytest.raises(ConfigError):
        SourceModel(pcr_mbps=-1.0)
    with pytest.raises(ConfigError):
        SourceModel(cap_mbps=0.0)
    with pytest.raises(ConfigError):
        SourceModel(start_ms=-1.0)
    with pytest.raises(ConfigError):
        SourceModel(start_ms=10.0, stop_ms=10.0)


# -- trace analysis helpers -------------------------------------------------------


def _hand_trace():
    times = [float(t) for t in range(10)]
    rate = {"s1": [0.0, 10.0, 20.0, 35.0, 40.0, 40.0, 40.0, 40.0, 40.0, 40.0]}
    return Trace(times=times, rate=rate, acr={"s1": list(rate["s1"])},
                 sessions=["s1"])


def test_convergence_time_on_a_hand_built_trace():
    trace = _hand_trace()
    # within max(2% * 40, 1) = 1 of the 40 Mbps target from index 4 on
    assert convergence_time(trace, {"s1": 40.0}) == 4.0
    assert convergence_time(trace, {"s1": 100.0}) is None
    assert convergence_time(trace, {"s1": 40.0}, rel_tol=2.0) == 0.0
    with pytest.raises(KeyError):
        convergence_time(trace, {"nope": 1.0})


def test_steady_state_window_math():
    trace = _hand_trace()
    assert steady_state_rates(trace, window=0.2)["s1"] == pytest.approx(40.0)
    # a window covering everything averages the whole series
    assert steady_state_rates(trace, window=0.999)["s1"] == pytest.approx(
        math.fsum(trace.rate["s1"]) / 10)


def test_utilization_windows():
    trace = Trace(times=[0.0, 1.0, 2.0, 3.0],
                  util={"l1": [0.0, 0.5, 1.0, 1.0]})
    assert utilization(trace, "l1", 0.5) == pytest.approx(1.0)
    assert utilization(trace, "l1", (1.0, 2.0)) == pytest.approx(0.75)
    assert utilization(trace, "l1", 0.999) == pytest.approx(2.5 / 4)
    with pytest.raises(KeyError):
        utilization(trace, "l9", 0.5)
    with pytest.raises(EmptyTraceError):
        utilization(trace, "l1", (8.0, 9.0))


def test_idle_link_reads_zero_utilization():
    net = NetworkSpec(links=[Link("l1", LINE), Link("l2", LINE)],
                      sessions=[Session(id="s1", route=("l1",))])
    trace = build(net, {"s1": SourceModel(icr_mbps=30.0)}).run(30.0)
    assert utilization(trace, "l2", 0.5) == 0.0
    assert utilization(trace, "l1", 0.5) > 0.5


def test_empty_trace_rejected():
    empty = Trace()
    with pytest.raises(EmptyTraceError):
        steady_state_rates(empty)
    with pytest.raises(EmptyTraceError):
        steady_state_acr(empty)
    with pytest.raises(EmptyTraceError):
        convergence_time(empty, {})
