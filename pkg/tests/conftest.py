import math

import pytest

from memspike.device import DeviceParams
from memspike.gates import calibrate_gate, load_gate


@pytest.fixture
def params():
    return DeviceParams()


@pytest.fixture
def half_params():
    """Per-step retention of exactly 0.5, as in the worked examples."""
    return DeviceParams(dt=1.0, tau=1.0 / math.log(2))


@pytest.fixture(scope="session")
def gates():
    return {name: load_gate(name) for name in ("not", "and", "or", "xor", "full-adder")}


@pytest.fixture(scope="session")
def gate_bands(gates):
    p = DeviceParams()
    return {name: calibrate_gate(g, p) for name, g in gates.items()}


_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record the outcome of one acceptance criterion: ``acceptance(n, title, ok, detail)``."""
    results = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(number, title, ok, detail=""):
        results[number] = (title, bool(ok), detail)
        assert ok, f"criterion {number} ({title}) failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, ok, detail = results[number]
        line = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}"
        terminalreporter.write_line(f"{line}  ({detail})" if detail else line)
