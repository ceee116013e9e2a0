"""Shared fixtures: mock platforms, function servers, engine state."""

from __future__ import annotations

import pytest

from gfaas.config import PlatformKind
from gfaas.container import reset_fake_engine
from gfaas.mockfaas import start_mock
from gfaas.shim import hello_world_handler, serve

ALL_KINDS = tuple(PlatformKind)


@pytest.fixture
def fresh_fake_engine():
    reset_fake_engine()
    yield
    reset_fake_engine()


@pytest.fixture
def hello_server():
    server = serve(hello_world_handler, port=0)
    yield server
    server.shutdown()


@pytest.fixture(params=[k.value for k in ALL_KINDS])
def mock_kind(request) -> PlatformKind:
    return PlatformKind(request.param)


@pytest.fixture
def mock_platform(mock_kind):
    handle = start_mock(mock_kind)
    yield handle
    handle.shutdown()


@pytest.fixture
def knative_mock():
    handle = start_mock(PlatformKind.KNATIVE)
    yield handle
    handle.shutdown()


# --- acceptance reporting -----------------------------------------------------
# Each acceptance criterion prints one PASS/FAIL line in the terminal summary.

_ACCEPTANCE_FILE = "test_acceptance.py"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    reports = []
    for outcome in ("passed", "failed", "error"):
        reports.extend(terminalreporter.stats.get(outcome, []))
    lines = []
    for report in reports:
        if getattr(report, "when", "call") != "call":
            continue
        nodeid = getattr(report, "nodeid", "")
        if _ACCEPTANCE_FILE not in nodeid:
            continue
        name = nodeid.split("::")[-1]
        verdict = "PASS" if report.outcome == "passed" else "FAIL"
        lines.append((name, verdict, getattr(report, "duration", 0.0)))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict, duration in sorted(lines):
        terminalreporter.write_line(f"{verdict}  {name}  ({duration:.2f}s)")
