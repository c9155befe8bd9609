import math

import numpy as np
import pytest

from chaoslink.channel import MultipathChannel
from chaoslink.waveform import WaveformConfig


def hand_basis(t):
    """Scalar basis function written out with ``math`` for use as an oracle."""
    ln2, w = math.log(2), 2 * math.pi
    if t >= 1 or t < -16:
        return 0.0
    osc = math.cos(w * t) - (ln2 / w) * math.sin(w * t)
    if t < 0:
        return 0.5 * math.exp(ln2 * t) * osc
    return 1 - math.exp(-ln2 * (t - 1)) * osc


def brute_force_coefficient(alpha, tau, i, n_samp=16):
    """Decision-instant contribution as an explicit inner product of shifted pulses."""
    return alpha * sum(
        hand_basis(j / n_samp) * hand_basis(j / n_samp - i - tau)
        for j in range(-20 * n_samp, 2 * n_samp)
    )


@pytest.fixture
def cfg():
    return WaveformConfig()


@pytest.fixture
def three_path():
    return MultipathChannel.default_three_path()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def acceptance_report(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    state = {}

    def record(number, text):
        state["number"], state["text"] = number, text

    yield record
    if "number" in state:
        failed = request.node.rep_call.failed if hasattr(request.node, "rep_call") else True
        _ACCEPTANCE[state["number"]] = f"{'FAIL' if failed else 'PASS'}  #{state['number']:>2} {state['text']}"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
