import time

import pytest

_START = time.perf_counter()
_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key): acceptance criterion reported in the summary")
    config.addinivalue_line("markers", "runs_last: moved to the end of the session")


def pytest_collection_modifyitems(items):
    # the wall-time check needs to see the rest of the suite
    last = [it for it in items if it.get_closest_marker("runs_last")]
    items[:] = [it for it in items if it not in last] + last


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    _CRITERIA[mark.args[0]] = ("PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: (int("".join(c for c in k if c.isdigit())), k)):
        status, detail = _CRITERIA[key]
        tr.write_line(f"criterion {key:<4} {status}  {detail}")
    elapsed = time.perf_counter() - _START
    tr.write_line(f"suite wall time {elapsed:.1f} s ({'PASS' if elapsed <= 120 else 'FAIL'} against 120 s)")


def session_elapsed() -> float:
    return time.perf_counter() - _START
