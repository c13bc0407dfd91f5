import pytest

_results: dict[int, list] = {}
_titles: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        n = mark.args[0]
        _titles[n] = mark.args[1] if len(mark.args) > 1 else ""
        detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
        if rep.outcome == "skipped" and isinstance(rep.longrepr, tuple):
            detail = rep.longrepr[2].removeprefix("Skipped: ")
        _results.setdefault(n, []).append((item.name, rep.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_results):
        outcomes = [o for _, o, _ in _results[n]]
        if all(o == "skipped" for o in outcomes):
            status = "SKIP"
        elif all(o in ("passed", "skipped") for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        tr.write_line(f"criterion {n:2d}: {status}  {_titles[n]}")
        for name, outcome, detail in _results[n]:
            tr.write_line(f"    {outcome.upper():7s} {name}: {detail}")
