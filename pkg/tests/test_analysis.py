import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import C, L, LBAR, RHO
from wrrbound.analysis import (ControlFlowAtPort, DepartureMode, PortConfig, burst_fixed_point,
                               burst_phase, burst_service_curve, delay_bound_burst, delay_bound_mean,
                               delay_bound_overall, delay_bound_rate_latency, departure_curve,
                               drain_denominator, drain_holds, frame_service_time, mean_phase,
                               min_weight_burst, min_weight_mean)
from wrrbound.curves import AffineArrivalCurve, RateLatencyCurve, default_step, horizontal_deviation
from wrrbound.errors import (DomainError, InfeasibleError, MeanPhaseUndefined, SaturationError,
                             UnstableError)

US = 1e-6


def flow(sigma=L, rho=RHO, frame=L):
    return ControlFlowAtPort(frame, AffineArrivalCurve(sigma, rho))


def port(w1=2, w2=1):
    return PortConfig(C, w1, w2, LBAR)


class TestTypes:
    @pytest.mark.parametrize("w1,w2", [(0, 1), (1, 0), (1.5, 1), (-2, 1)])
    def test_bad_weights(self, w1, w2):
        with pytest.raises(DomainError):
            PortConfig(C, w1, w2, LBAR)

    def test_bad_capacity_and_frame(self):
        with pytest.raises(DomainError):
            PortConfig(0, 1, 1, LBAR)
        with pytest.raises(DomainError):
            PortConfig(C, 1, 1, 0)

    def test_burst_smaller_than_frame(self):
        with pytest.raises(DomainError):
            flow(sigma=L - 1)

    def test_tau_bar(self):
        assert port().tau_bar == pytest.approx(1220.8 * US)


def test_frame_service_time():
    assert frame_service_time(576, 1e7) == pytest.approx(57.6 * US)
    assert frame_service_time(12208, 1e7) == pytest.approx(1220.8 * US)
    assert frame_service_time(0, 5) == 0
    with pytest.raises(DomainError):
        frame_service_time(1, 0)


class TestBurstPhase:
    def test_switch1(self):
        r = burst_phase(port(), flow())
        assert r.tau_v == pytest.approx(1220.8 * US)
        assert r.tau_f == pytest.approx(115.2 * US)
        assert r.k == 1
        assert r.drain_time == pytest.approx(1336 * US)
        assert drain_denominator(port(), flow()) == pytest.approx(1152 - 140.63616)

    def test_larger_bursts_need_more_cycles(self):
        # denominator is 1011.36 bits, so 2024 bits is just over two cycles' worth
        assert burst_phase(port(), flow(sigma=2000)).k == 2
        assert burst_phase(port(), flow(sigma=2024)).k == 3

    def test_no_sustained_rate(self):
        r = burst_phase(port(w1=1), flow(rho=0))
        assert (r.tau_v, r.k) == (pytest.approx(1220.8 * US), 1)
        assert r.tau_f == pytest.approx(57.6 * US)

    def test_saturation(self):
        # one control frame per cycle against eight full background frames at 100 kb/s+
        with pytest.raises(SaturationError, match="never drains"):
            burst_phase(port(w1=1, w2=8), flow(rho=RHO))

    def test_unstable(self):
        with pytest.raises(UnstableError):
            burst_phase(port(), flow(rho=C))

    def test_strict_mode_warns_on_disagreement(self):
        # sigma sits between the two denominators' multiples
        p, f = port(w1=2, w2=1), flow(sigma=1000)
        with pytest.warns(RuntimeWarning, match="differs"):
            burst_phase(p, f, strict=True)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            burst_phase(p, flow(), strict=True)


class TestMinWeightBurst:
    def test_switch1(self):
        assert min_weight_burst(port(w1=7), flow()) == 2

    def test_switch2_burst(self):
        assert min_weight_burst(port(w2=2), flow(sigma=2 * L)) == 3

    def test_negligible_rate(self):
        for w2 in (1, 4, 8):
            assert min_weight_burst(port(w2=w2), flow(rho=1e-9)) == 1

    def test_cap(self):
        with pytest.raises(InfeasibleError):
            min_weight_burst(port(w2=8), flow(sigma=50 * L), cap=3)

    @pytest.mark.parametrize("w2", range(1, 9))
    @pytest.mark.parametrize("sigma", [L, 2 * L, 1500, 5000])
    def test_minimality(self, w2, sigma):
        p, f = port(w2=w2), flow(sigma=sigma)
        w1, k = burst_fixed_point(p, f)
        ok = p.with_weights(w1=w1)
        assert burst_phase(ok, f).k == k
        assert drain_holds(ok, f, k)
        if w1 > 1:
            below = p.with_weights(w1=w1 - 1)
            broken = drain_denominator(below, f) <= 0 or not drain_holds(below, f, k)
            assert broken


class TestMeanPhase:
    def test_switch1(self):
        r = mean_phase(port(), flow())
        assert r.tau_v == pytest.approx(4883.2 * US)
        assert r.tau_f == pytest.approx(56.91 * US, abs=0.01 * US)
        assert r.tau_f == pytest.approx(RHO * 4883.2e-6 / (C - RHO))

    def test_two_background_frames(self):
        assert mean_phase(port(w2=2), flow()).tau_v == pytest.approx(4883.2 * US)

    def test_vacation_longer_than_gap(self):
        r = mean_phase(port(w2=5), flow())
        assert (r.tau_v, r.tau_f) == (0, 0)

    def test_undefined_without_rate(self):
        with pytest.raises(MeanPhaseUndefined):
            mean_phase(port(), flow(rho=0))

    def test_min_weight_mean(self):
        assert min_weight_mean(port(), flow()) == 1
        assert min_weight_mean(port(w2=2), flow()) == 1
        assert min_weight_mean(port(), flow(rho=0)) == 1
        assert min_weight_mean(port(), flow(rho=1e-3)) == 1


class TestDelayBounds:
    def test_rate_latency_examples(self):
        assert delay_bound_rate_latency(576, 115200, 862275.45, 1220.8 * US) == pytest.approx(1888.8 * US, abs=0.05 * US)
        assert delay_bound_rate_latency(0, 5.0, 10.0, 0.0) == 0
        r2 = 9 * 576 / 2960e-6
        assert delay_bound_rate_latency(1152, 115200, r2, 2441.6 * US) == pytest.approx(3099.4 * US, abs=0.05 * US)

    def test_rate_latency_errors(self):
        with pytest.raises(UnstableError):
            delay_bound_rate_latency(1, 10, 10, 0)
        with pytest.raises(DomainError):
            delay_bound_rate_latency(1, 1, 10, 0, tau_i=-1)

    def test_rate_latency_tau_i(self):
        d = delay_bound_rate_latency(576, 115200, 862275.45, 1220.8 * US, tau_i=100 * US)
        assert d == pytest.approx(1120.8 * US + (576 + 11.52) / 862275.45)

    def test_burst_examples(self):
        assert delay_bound_burst(port(), flow()) == pytest.approx(1888.8 * US, abs=0.05 * US)
        assert delay_bound_burst(port(9, 2), flow(sigma=2 * L)) == pytest.approx(3099.4 * US, abs=0.05 * US)

    def test_burst_large_w1_limit(self):
        d = delay_bound_burst(port(w1=10**6), flow())
        assert d == pytest.approx(1220.8 * US + L / C, rel=1e-5)

    def test_mean_examples(self):
        refined, pess = delay_bound_mean(port(), flow())
        assert refined == pytest.approx(1278.4 * US)
        assert pess == pytest.approx(4883.2 * US)
        assert delay_bound_mean(port(w2=2), flow())[0] == pytest.approx(2499.2 * US)
        assert delay_bound_mean(port(), flow(rho=0))[1] is None

    def test_overall_examples(self):
        b1 = delay_bound_overall(port(), flow())
        assert b1.overall == pytest.approx(1888.8 * US, abs=0.1 * US)
        assert b1.burst_bound > b1.mean_bound
        b2 = delay_bound_overall(port(9, 2), flow(sigma=2 * L))
        assert b2.overall == pytest.approx(3099.4 * US, abs=1 * US)

    def test_overall_boundary_sigma_equals_frame(self):
        # sigma = L: burst bound = w2*tau_bar + (L/C)(1 + w2*Lbar/(w1*L)) >= mean bound, with
        # equality only in the w1 -> infinity limit
        for w1 in (1, 4, 64, 10**4):
            b = delay_bound_overall(port(w1=w1), flow())
            assert b.overall == b.burst_bound
            assert b.burst_bound - b.mean_bound == pytest.approx(L / C * LBAR / (w1 * L), rel=1e-9)

    def test_rate_above_guarantee_is_unstable(self):
        # k denominator positive, yet rho exceeds the control queue's WRR rate
        f = flow(sigma=L, rho=0.7 * C)
        p = PortConfig(C, 4, 1, 2 * L)
        assert drain_denominator(p, f) > 0
        with pytest.raises(UnstableError):
            delay_bound_burst(p, f)


class TestDeparture:
    def test_examples(self):
        d = departure_curve(port(), flow(), DepartureMode.PAPER_CASE_STUDY)
        assert (d.sigma, d.rho) == (1152, RHO)
        e = departure_curve(port(), flow(), "eq12")
        assert e.sigma == pytest.approx(716.62, abs=0.02)
        assert e.rho == RHO
        z = departure_curve(port(w1=3), flow(rho=0), DepartureMode.EQ12_MIN)
        assert (z.sigma, z.rho) == (L, 0)

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            departure_curve(port(), flow(), "nope")


valid = st.tuples(st.integers(1, 64), st.integers(1, 8), st.integers(1, 40), st.floats(0, 0.5))


def _case(w1, w2, burst_frames, load):
    """Port and flow with a drainable burst; load is rho as a fraction of the WRR rate."""
    p = port(w1, w2)
    f0 = flow(sigma=burst_frames * L, rho=0)
    rate = burst_service_curve(p, f0).rate
    f = flow(sigma=burst_frames * L, rho=load * rate)
    return p, f


@given(valid)
def test_closed_form_matches_rate_latency(case):
    p, f = _case(*case)
    if drain_denominator(p, f) <= 0:
        return
    curve = burst_service_curve(p, f)
    expected = delay_bound_rate_latency(f.sigma, f.rho, curve.rate, curve.latency)
    assert delay_bound_burst(p, f) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(valid)
def test_closed_form_matches_horizontal_deviation(case):
    p, f = _case(*case)
    if drain_denominator(p, f) <= 0:
        return
    curve = burst_service_curve(p, f)
    exact = delay_bound_burst(p, f)
    step = default_step(f.arrival, curve)
    d = horizontal_deviation(f.arrival, RateLatencyCurve(curve.rate, curve.latency),
                             horizon=2 * exact, step=step)
    assert abs(d - exact) <= 2 * step


@given(valid)
def test_burst_bound_monotone_in_weights(case):
    w1, w2, frames, _ = case
    f = flow(sigma=frames * L, rho=0)
    d = delay_bound_burst(port(w1, w2), f)
    assert delay_bound_burst(port(w1 + 1, w2), f) < d
    assert delay_bound_burst(port(w1, w2 + 1), f) > d


@given(valid, st.sampled_from(list(DepartureMode)))
def test_departure_and_floor(case, mode):
    p, f = _case(*case)
    if drain_denominator(p, f) <= 0:
        return
    min_burst = departure_curve(p, f, DepartureMode.EQ12_MIN)
    quota = departure_curve(p, f, DepartureMode.PAPER_CASE_STUDY)
    assert min_burst.sigma <= quota.sigma
    assert departure_curve(p, f, mode).rho == f.rho
    assert delay_bound_overall(p, f).overall >= L / C
