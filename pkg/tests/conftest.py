import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from ndlatency import ProtocolParams  # noqa: E402

ACCEPTANCE_LINES = {}


def record_acceptance(number: int, passed: bool, detail: str):
    ACCEPTANCE_LINES[number] = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])


@st.composite
def protocol_params(draw, max_ts=400, max_ta_factor=4, with_da=True):
    Ts = draw(st.integers(2, max_ts))
    # small windows give deep recursions
    ds_eff = draw(st.integers(1, Ts) | st.integers(1, max(1, Ts // 32)))
    da = draw(st.integers(0, Ts - ds_eff)) if with_da else 0
    Ta = draw(st.integers(1, max_ta_factor * Ts))
    return ProtocolParams(Ta=Ta, Ts=Ts, ds=ds_eff + da, da=da)


@pytest.fixture
def acceptance():
    return record_acceptance
