import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from transient_bench.circuit import Circuit, Resistor, Switch, VoltageSource

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    return request.param


def step_source(c: Circuit, node: int, volts: float = 1.0, t_close: float = 0.0) -> int:
    """Ideal DC source behind a switch closing at ``t_close``; returns the switched node."""
    src = c.add_node()
    c.add_element(VoltageSource(src, volts))
    c.add_element(Switch(src, node, t_close))
    return node


def max_rel_err(got, want, scale=None):
    got, want = np.asarray(got), np.asarray(want)
    scale = np.abs(want).max() if scale is None else scale
    return float(np.abs(got - want).max() / scale)


def single_resistor_circuit():
    c = Circuit()
    n = c.add_node()
    c.add_element(VoltageSource(n, 10.0))
    c.add_element(Resistor(n, 0, 100.0))
    return c


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
