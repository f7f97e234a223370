from __future__ import annotations

import math
from collections import OrderedDict

import pytest

from mkglab.dynamics import DataSpec, SimConfig, convergence_study

REFERENCE = SimConfig(n=128, length=2 * math.pi, t_end=1.0, seed=7, formulation="nullform",
                      data_spec=DataSpec(s=2.0, sp=2.0, amplitude=0.5, band=4))

_CRITERIA: "OrderedDict[int, dict]" = OrderedDict()
_OWNER: dict[str, int] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            num, title = mark.args
            _CRITERIA.setdefault(num, {"title": title, "outcomes": []})
            _OWNER[item.nodeid] = num


def pytest_runtest_logreport(report):
    num = _OWNER.get(report.nodeid)
    if num is None:
        return
    # the call phase decides, unless setup already failed
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA[num]["outcomes"].append((report.nodeid, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        entry = _CRITERIA[num]
        outcomes = entry["outcomes"]
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for _, o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        failed = [nid.split("::")[-1] for nid, o in outcomes if o != "passed"]
        tail = f"  (failing: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {num}: {status}  {entry['title']}{tail}")


@pytest.fixture(scope="session")
def reference_study():
    """Nullform runs at dt, dt/2, dt/4 on the reference grid, from one initial state."""
    return convergence_study(REFERENCE, refinements=3)
