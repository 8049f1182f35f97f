import math

import pytest

from atomloc import ModelParams, kernels

FIG3 = ModelParams(30.0, 20.0, 20.0, phi=0.0, gamma1=1.0, gamma2=0.0)
FIG4 = ModelParams(30.0, 20.0, 10.0, phi=0.0, gamma1=1.0, gamma2=0.0)
FIG6 = ModelParams(20.0, 22.0, 25.0, phi=0.0, gamma1=1.0, gamma2=1.0)
HALF_PI = math.pi / 2


@pytest.fixture(params=kernels.available())
def backend(request):
    return request.param


def rel(a, b, floor=1e-12):
    return abs(a - b) / max(abs(b), floor)


_CRITERIA = {}


def record_criterion(n, ok, detail):
    _CRITERIA[n] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
