import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run full-size slow checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    if not acceptance_log.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(acceptance_log.LINES, key=lambda k: (int(k.rstrip("ab")), k)):
        terminalreporter.write_line(acceptance_log.LINES[key])
