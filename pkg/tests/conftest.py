from __future__ import annotations

import math

import pytest
from hypothesis import HealthCheck, settings

from hypersqg.initial_data import BumpSpec
from hypersqg.profile import DisplacementProfile, Z1Grid
from hypersqg.quadrature import QuadratureRule

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

TOP = math.log(3.0)  # support top of the standard bump: log(N M)


@pytest.fixture(scope="session")
def spec() -> BumpSpec:
    return BumpSpec()


@pytest.fixture(scope="session")
def zero_spec() -> BumpSpec:
    return BumpSpec(A=0.0)


@pytest.fixture(scope="session")
def rule() -> QuadratureRule:
    return QuadratureRule()


@pytest.fixture(scope="session")
def grid() -> Z1Grid:
    return Z1Grid(-30.0, TOP + 1.0, 1024)


@pytest.fixture(scope="session")
def small_grid() -> Z1Grid:
    return Z1Grid(-30.0, TOP + 1.0, 256)


@pytest.fixture
def rest(grid) -> DisplacementProfile:
    return DisplacementProfile.zero(grid)


# --- acceptance report -------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
