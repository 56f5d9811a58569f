"""Acceptance bookkeeping: one PASS/FAIL line per criterion after the run."""
import pytest

_OUTCOMES: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number): acceptance criterion checked by the test")


@pytest.fixture
def record(request):
    """Attach a one-line measurement to the current test's summary entry."""

    def _record(text: str) -> None:
        request.node.user_properties.append(("detail", text))
        print(text)

    return _record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        if hasattr(rep, "wasxfail"):
            state = "XFAIL" if rep.skipped else "FAIL"
        else:
            state = "PASS" if rep.passed else "FAIL"
        details = [v for k, v in item.user_properties if k == "detail"]
        _OUTCOMES.setdefault(mark.args[0], []).append((item.name, state, details))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        parts = _OUTCOMES[number]
        states = {s for _, s, _ in parts}
        if states == {"PASS"}:
            verdict = "PASS"
        elif "FAIL" in states:
            verdict = "FAIL"
        else:
            verdict = "FAIL (expected, see decisions ledger)"
        tr.write_line(f"criterion {number:2d}: {verdict}")
        for name, state, details in parts:
            for d in details:
                tr.write_line(f"    [{state}] {name}: {d}")
