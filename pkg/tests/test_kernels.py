"""The compiled kernels and the pure-Python fallback must agree."""
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wrrbound import _kernels

BACKENDS = _kernels.backends()
needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")


def test_backend_selected():
    assert _kernels.BACKEND in BACKENDS
    if "compiled" in BACKENDS and os.environ.get("WRRBOUND_PURE") != "1":
        assert _kernels.BACKEND == "compiled"


def test_pure_override():
    code = "from wrrbound import _kernels; print(_kernels.BACKEND)"
    env = dict(os.environ, WRRBOUND_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_hdev_rate_latency_closed_form(kernels):
    # sigma=576, rho=115.2 kb/s against R=862275 b/s, T=1220.8 us
    rate = 1152 / 1336e-6
    d = kernels.hdev_affine(_kernels.BETA_RATE_LATENCY, 576.0, 115200.0, rate, 1220.8e-6, 0.0,
                            5e-3, 1e-6, 1.0, 1e-9)
    assert d == pytest.approx(1220.8e-6 + 576 / rate, abs=2e-9)


def test_hdev_saturation_flag(kernels):
    d = kernels.hdev_affine(_kernels.BETA_RATE_LATENCY, 1.0, 20.0, 10.0, 0.0, 0.0, 10.0, 0.5, 2.0, 1e-3)
    assert d == -1.0


def test_simulate_port_single_frame(kernels):
    out = kernels.simulate_port(np.array([0.0]), np.array([576.0]), 1e7, 2, 1, False, 12208.0, 1.0,
                                True, 10, True)
    assert out["status"] == _kernels.SIM_OK
    assert out["depart"][0] == pytest.approx(57.6e-6)
    assert out["ctrl_bits"] == 576.0 and out["bg_bits"] == 0.0
    assert out["rec_queue"].tolist() == [0]


def test_simulate_port_saturates(kernels):
    t = np.arange(200) * 1e-4
    out = kernels.simulate_port(t, np.full(200, 576.0), 1e7, 1, 8, True, 12208.0, 0.02,
                                True, 20, False)
    assert out["status"] == _kernels.SIM_SATURATED


hdev_args = st.tuples(
    st.sampled_from([_kernels.BETA_RATE_LATENCY, _kernels.BETA_WRR]),
    st.floats(0, 1e4), st.floats(0, 0.9), st.floats(1e-5, 1e-2), st.floats(1e-5, 1e-2),
    st.floats(1e5, 1e8))


@needs_both
@settings(max_examples=150, deadline=None)
@given(hdev_args)
def test_hdev_parity(args):
    kind, sigma, load, a, b, cap = args
    if kind == _kernels.BETA_RATE_LATENCY:
        p = (cap, a, 0.0)
        rate = cap
    else:
        p = (a, b, cap)
        rate = cap * b / (a + b)
    rho = load * rate
    step = min(a, b) / 20
    horizon = 200 * step
    res = [m.hdev_affine(kind, sigma, rho, *p, horizon, step, 1.0, step * 1e-3)
           for m in BACKENDS.values()]
    assert res[0] == pytest.approx(res[-1], rel=1e-12, abs=1e-15)


@needs_both
@settings(max_examples=150, deadline=None)
@given(gaps=st.lists(st.floats(0, 3e-3), min_size=0, max_size=60),
       w1=st.integers(1, 6), w2=st.integers(1, 4), bg=st.booleans(), gating=st.booleans(),
       horizon=st.floats(1e-3, 0.1), cap=st.integers(1, 40))
def test_simulate_parity(gaps, w1, w2, bg, gating, horizon, cap):
    t = np.cumsum(np.asarray(gaps, dtype=float))
    lens = np.full(len(t), 576.0)
    outs = [m.simulate_port(t, lens, 1e7, w1, w2, bg, 12208.0, horizon, gating, cap, True)
            for m in BACKENDS.values()]
    a, b = outs[0], outs[-1]
    assert a.keys() == b.keys()
    for k in a:
        if isinstance(a[k], np.ndarray):
            np.testing.assert_array_equal(a[k], b[k])
        else:
            assert a[k] == b[k], k
