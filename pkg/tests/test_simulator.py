import dataclasses
import io

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import C, L, LBAR
from wrrbound.analysis import DepartureMode, PortConfig
from wrrbound.errors import DomainError, NoSamplesError, SaturationError, UnknownFlowError
from wrrbound.simulator import (max_observed_delay, port_throughput, run_simulation, write_trace_csv)
from wrrbound.topology import FlowClass, background_bandwidth, find_flow, propagate_analysis

US = 1e-6
S13, S22 = ("S1", 3), ("S2", 2)
TAU, TAU_BAR = L / C, LBAR / C


def ctrl(doc):
    return find_flow(list(doc.flows), "ctrl")


def control_only(doc):
    return [f for f in doc.flows if f.cls is FlowClass.CONTROL]


class TestBasics:
    def test_single_frame_empty_network(self, case_doc):
        trace = run_simulation(case_doc.topology, control_only(case_doc), 1e-3, 0, phases={"ctrl": 0.0})
        per_hop, e2e = max_observed_delay(trace, "ctrl")
        assert per_hop == pytest.approx((57.6 * US, 57.6 * US), abs=1e-12)
        assert e2e == pytest.approx(115.2 * US, abs=1e-12)
        frames = list(trace.frames("ctrl"))
        assert len(frames) == 1
        f = frames[0]
        assert f.creation_time == 0.0
        assert f.arrivals[1] == f.departures[0]

    def test_no_samples(self, case_doc):
        trace = run_simulation(case_doc.topology, list(case_doc.flows), 1e-3, 0, phases={"ctrl": 4e-3})
        with pytest.raises(NoSamplesError) as info:
            max_observed_delay(trace, "ctrl")
        assert info.value.code == "E_NO_SAMPLES"

    def test_unknown_flow(self, case_doc):
        trace = run_simulation(case_doc.topology, list(case_doc.flows), 0.02, 0)
        with pytest.raises(UnknownFlowError):
            max_observed_delay(trace, "bg23")

    def test_bad_arguments(self, case_doc):
        flows = list(case_doc.flows)
        with pytest.raises(DomainError):
            run_simulation(case_doc.topology, flows, 0, 0)
        with pytest.raises(DomainError):
            run_simulation(case_doc.topology, flows, 1, 0, gating="half")

    def test_cycle_rejected(self, case_doc):
        f = ctrl(case_doc)
        loop = dataclasses.replace(f, name="back", path=(S22, S13))
        with pytest.raises(DomainError, match="cycle"):
            run_simulation(case_doc.topology, [f, loop], 0.01, 0)

    def test_frames_are_ordered(self, case_doc):
        trace = run_simulation(case_doc.topology, list(case_doc.flows), 1.0, 3)
        ft = trace.flows["ctrl"]
        assert len(ft.frame_ids) == 200
        for fr in trace.frames("ctrl"):
            stamps = [t for pair in zip(fr.arrivals, fr.departures) for t in pair]
            assert stamps == sorted(stamps)
        assert 0 <= trace.phases["ctrl"] < 5e-3


class TestSchedulerInvariants:
    @pytest.fixture
    def logged(self, case_doc):
        f = ctrl(case_doc)
        twin = dataclasses.replace(f, name="ctrl2", source=dataclasses.replace(f.source, period=3.1e-3))
        flows = list(case_doc.flows) + [twin]
        return run_simulation(case_doc.topology, flows, 0.5, 11, record=True)

    @pytest.mark.parametrize("name", ["S1.3", "S2.2"])
    def test_work_conserving(self, logged, name):
        log = logged.ports[name].log
        # background is saturated at both ports, so the link never idles
        assert np.all(log["start"][1:] == log["end"][:-1])
        assert log["start"][0] == 0.0

    @pytest.mark.parametrize("name", ["S1.3", "S2.2"])
    def test_quota_per_visit(self, logged, name, case_doc):
        log = logged.ports[name].log
        port = case_doc.topology.ports[(name[:2], int(name[3:]))]
        visits, counts = np.unique(log["visit"], return_counts=True)
        for v, c in zip(visits, counts):
            queues = set(log["queue"][log["visit"] == v].tolist())
            assert len(queues) == 1
            assert c <= (port.w1, port.w2)[queues.pop()]

    @pytest.mark.parametrize("name", ["S1.3", "S2.2"])
    def test_fifo_and_no_early_service(self, logged, name):
        log = logged.ports[name].log
        arrival, depart = log["arrival"], log["depart"]
        assert np.all(np.diff(arrival) >= 0)
        assert np.all(np.diff(depart) > 0)
        ctrl_end = log["end"][log["queue"] == 0]
        np.testing.assert_array_equal(ctrl_end, depart)
        assert np.all(depart - arrival >= TAU - 1e-12)

    def test_empty_control_queue_is_skipped(self, case_doc):
        trace = run_simulation(case_doc.topology, list(case_doc.flows), 0.05, 0, record=True)
        log = trace.ports["S2.3"].log
        assert set(log["queue"].tolist()) == {1}


class TestAdversarial:
    def test_vacation_is_real(self, case_doc):
        # two control flows released together: at S2.2 with (1, 1) the second frame must wait
        # behind a full background frame
        topo = case_doc.topology.with_weights({S22: (1, 1)})
        f = ctrl(case_doc)
        twin = dataclasses.replace(f, name="ctrl2")
        flows = list(case_doc.flows) + [twin]
        trace = run_simulation(topo, flows, 1.0, 0, phases={"ctrl": 0.0, "ctrl2": 0.0})
        worst = max(max_observed_delay(trace, n)[0][1] for n in ("ctrl", "ctrl2"))
        assert worst >= TAU_BAR


@pytest.mark.parametrize("gating", ["open", "closed"])
def test_soundness_case_study(case_doc, gating):
    f = ctrl(case_doc)
    for mode in DepartureMode:
        bound = propagate_analysis(case_doc.topology, f, mode)
        for seed in range(5):
            trace = run_simulation(case_doc.topology, list(case_doc.flows), 2.0, seed, gating=gating)
            per_hop, e2e = max_observed_delay(trace, "ctrl")
            for obs, h in zip(per_hop, bound.hops):
                assert obs <= h.bound.overall
            assert e2e <= bound.end_to_end


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(w=st.tuples(st.integers(1, 12), st.integers(1, 4), st.integers(1, 12), st.integers(1, 4)),
       seed=st.integers(0, 2**31), gating=st.sampled_from(["open", "closed"]),
       mode=st.sampled_from(list(DepartureMode)))
def test_soundness_random_weights(case_doc, w, seed, gating, mode):
    topo = case_doc.topology.with_weights({S13: (w[0], w[1]), S22: (w[2], w[3])})
    try:
        bound = propagate_analysis(topo, ctrl(case_doc), mode)
    except SaturationError:
        return
    trace = run_simulation(topo, list(case_doc.flows), 0.5, seed, gating=gating)
    per_hop, e2e = max_observed_delay(trace, "ctrl")
    assert all(o <= h.bound.overall for o, h in zip(per_hop, bound.hops))
    assert e2e <= bound.end_to_end


def test_deterministic(case_doc):
    runs = [run_simulation(case_doc.topology, list(case_doc.flows), 1.0, 42) for _ in range(2)]
    a, b = runs
    assert a.phases == b.phases
    for name in a.flows:
        np.testing.assert_array_equal(a.flows[name].depart, b.flows[name].depart)
        np.testing.assert_array_equal(a.flows[name].frame_ids, b.flows[name].frame_ids)
    assert a.ports == b.ports
    c = run_simulation(case_doc.topology, list(case_doc.flows), 1.0, 43)
    assert c.phases != a.phases


def test_saturation(case_doc):
    topo = case_doc.topology.with_weights({S22: (1, 10)})
    with pytest.raises(SaturationError) as info:
        run_simulation(topo, list(case_doc.flows), 10.0, 0)
    assert info.value.hop == "S2.2"
    # a larger cap only delays the overflow
    with pytest.raises(SaturationError):
        run_simulation(topo, list(case_doc.flows), 10.0, 0, queue_cap=1024)


class TestThroughput:
    @pytest.mark.parametrize("w1,w2", [(2, 1), (9, 2), (1, 1), (5, 3)])
    def test_matches_background_bandwidth(self, w1, w2):
        port = PortConfig(C, w1, w2, LBAR)
        ctrl_rate, bg_rate = port_throughput(port, L, 1000)
        assert bg_rate == pytest.approx(background_bandwidth(port, L), rel=0.01)
        assert ctrl_rate + bg_rate == pytest.approx(C, rel=0.01)

    def test_trace_throughput(self, case_doc):
        trace = run_simulation(case_doc.topology, list(case_doc.flows), 2.0, 0)
        ctrl_rate, bg_rate = trace.throughput("S1.3")
        assert ctrl_rate == pytest.approx(115.2e3, rel=0.01)
        assert ctrl_rate + bg_rate == pytest.approx(C, rel=0.01)


def test_trace_csv(case_doc):
    trace = run_simulation(case_doc.topology, list(case_doc.flows), 0.02, 1)
    buf = io.StringIO()
    write_trace_csv(trace, buf)
    lines = buf.getvalue().split("\n")
    assert lines[0] == "frame_id,flow,hop,arrival_s,depart_s,delay_s"
    assert lines[-1] == ""
    rows = [ln.split(",") for ln in lines[1:-1]]
    assert len(rows) == 4 * 2
    assert [r[2] for r in rows[:2]] == ["S1.3", "S2.2"]
    for r in rows:
        for cell in r[3:]:
            assert len(cell.split(".")[1]) == 9
        assert float(r[5]) == pytest.approx(float(r[4]) - float(r[3]), abs=2e-9)
