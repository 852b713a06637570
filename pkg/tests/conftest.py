import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hestonfx import HestonParams, MarketEnv  # noqa: E402

# reference sets used throughout: a moderate-skew FX set and a low-vol smile set
REF_PARAMS = HestonParams(kappa=2.0, theta=0.04, sigma=0.3, rho=-0.05, v0=0.04)
REF_ENV = MarketEnv(spot=4.0, rd=0.05, rf=0.03)
SMILE_PARAMS = HestonParams(kappa=1.5, theta=0.015, sigma=0.2, rho=0.05, v0=0.01)
SMILE_ENV = MarketEnv(spot=1.2, rd=0.02, rf=0.01)


@pytest.fixture
def ref():
    return REF_PARAMS, REF_ENV


@pytest.fixture
def smile_set():
    return SMILE_PARAMS, SMILE_ENV


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
