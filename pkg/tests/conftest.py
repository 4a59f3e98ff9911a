import math

import numpy as np
import pytest
from hypothesis import strategies as st

from qtraj import kernels
from qtraj.qshje import Microstate


@pytest.fixture(params=sorted(kernels.IMPLEMENTATIONS))
def kernel_impl(request, monkeypatch):
    """Run a test once per importable Taylor-kernel implementation."""
    impl = kernels.IMPLEMENTATIONS[request.param]
    monkeypatch.setattr(kernels, "taylor_table", impl.taylor_table)
    monkeypatch.setattr(kernels, "taylor_eval", impl.taylor_eval)
    return request.param


def random_microstates(n, seed):
    """``n`` valid microstates with a, b log-uniform in [1/e, e] and |c| < 1.8 sqrt(ab)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        a, b = np.exp(rng.uniform(-1.0, 1.0, 2))
        c = rng.uniform(-0.9, 0.9) * 2.0 * math.sqrt(a * b)
        out.append(Microstate(a, b, c))
    return out


@st.composite
def microstates(draw):
    a = math.exp(draw(st.floats(-1.0, 1.0)))
    b = math.exp(draw(st.floats(-1.0, 1.0)))
    frac = draw(st.floats(-0.9, 0.9))
    return Microstate(a, b, frac * 2.0 * math.sqrt(a * b))


# one pass/fail line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def record_acceptance(label, passed, detail):
    ACCEPTANCE_LINES[label] = f"{label} {'PASS' if passed else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[label])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE_LINES, key=lambda s: int(s[2:])):
        terminalreporter.write_line(ACCEPTANCE_LINES[label])
