import time

import pytest

_RESULTS = {}


@pytest.fixture
def clock(request):
    """Records elapsed time and a one-line detail for an acceptance criterion."""
    record = {"detail": "", "elapsed": None}
    start = time.perf_counter()

    def stop(detail=""):
        record["elapsed"] = time.perf_counter() - start
        record["detail"] = detail
        return record["elapsed"]

    request.node._criterion = record
    return stop


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    number, title, limit = mark.args
    if rep.when == "setup" and rep.passed:
        return
    record = getattr(item, "_criterion", {"detail": "", "elapsed": None})
    _RESULTS[number] = (title, limit, rep.passed, record)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, limit, passed, record = _RESULTS[number]
        elapsed = record["elapsed"]
        timing = f"{elapsed:.2f}s" if elapsed is not None else "n/a"
        status = "PASS" if passed else "FAIL"
        detail = f" - {record['detail']}" if record["detail"] else ""
        terminalreporter.write_line(f"[{status}] {number:2d}. {title} ({timing}, limit {limit}s){detail}")
