"""Per-criterion PASS/FAIL lines for the acceptance suite."""
import collections

import pytest

_outcomes = collections.defaultdict(list)
_titles = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            n = mark.args[0]
            _titles.setdefault(n, mark.kwargs.get("title", ""))
            item.user_properties.append(("criterion", n))


@pytest.hookimpl(trylast=True)
def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or report.outcome == "failed":
        _outcomes[crit].append((report.nodeid, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        failed = [node for node, outcome in _outcomes[n] if outcome != "passed"]
        status = "FAIL" if failed else "PASS"
        line = f"criterion {n}: {status}  {_titles.get(n, '')}"
        if failed:
            line += f"  ({len(failed)} of {len(_outcomes[n])} failed)"
        terminalreporter.write_line(line)
