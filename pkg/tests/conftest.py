import pathlib

import pytest

from wrrbound import _kernels
from wrrbound.analysis import ControlFlowAtPort, PortConfig
from wrrbound.config import parse_config
from wrrbound.curves import AffineArrivalCurve

ROOT = pathlib.Path(__file__).resolve().parents[1]
CASE_STUDY = ROOT / "src" / "wrrbound" / "data" / "case_study.conf"

C = 1e7
L = 72 * 8
LBAR = 1526 * 8
RHO = L / 5e-3


@pytest.fixture
def case_text():
    return CASE_STUDY.read_text()


@pytest.fixture
def case_doc(case_text):
    return parse_config(case_text)


@pytest.fixture
def switch1():
    return PortConfig(C, 2, 1, LBAR), ControlFlowAtPort(L, AffineArrivalCurve(L, RHO))


@pytest.fixture
def switch2():
    return PortConfig(C, 9, 2, LBAR), ControlFlowAtPort(L, AffineArrivalCurve(2 * L, RHO))


@pytest.fixture(params=sorted(_kernels.backends()))
def kernels(request):
    """Each available kernel backend in turn."""
    return _kernels.backends()[request.param]


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
