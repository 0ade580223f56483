import numpy as np
import pytest

from hubridge import kernels


@pytest.fixture(params=kernels.BACKENDS)
def backend(request):
    """Run the test once per available kernel backend."""
    with kernels.backend(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20150907)


def pytest_terminal_summary(terminalreporter):
    import sys

    lines = []
    for mod in list(sys.modules.values()):
        lines.extend(getattr(mod, "ACCEPTANCE_LINES", ()))
    if lines:
        terminalreporter.section("acceptance criteria")
        def order(line):
            label = line.split()[1].rstrip(":")
            return (0, int(label)) if label.isdigit() else (1, label)

        for line in sorted(set(lines), key=order):
            terminalreporter.write_line(line)
