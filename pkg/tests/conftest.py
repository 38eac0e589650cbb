import json
from pathlib import Path

import pytest

from bms_rare.objective import Objective

FIXTURES = Path(__file__).with_name("fixtures")

# filled by tests/test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def objective():
    return Objective()


@pytest.fixture(scope="session")
def hand_traces():
    return json.loads((FIXTURES / "hand_traces.json").read_text())


@pytest.fixture(scope="session")
def acceptance_lines():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
