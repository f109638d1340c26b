import pytest

from elfd.harness.synthetic import write_texture_dataset


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """10 texture classes x 3 images of 48x48."""
    return write_texture_dataset(tmp_path_factory.mktemp("tiny") / "data", n_classes=10, per_class=3,
                                 size=48, seed=5)


_CRITERIA: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    # setup time is included so that shared fixtures (the synthetic suite) are counted
    tests = _CRITERIA.setdefault(marker.args[0], {})
    state, seconds = tests.get(item.name, ("passed", 0.0))
    if report.failed:
        state = "failed"
    elif report.skipped and state != "failed":
        state = "skipped"
    tests[item.name] = (state, seconds + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        tests = _CRITERIA[number]
        states = {s for s, _ in tests.values()}
        if "failed" in states:
            verdict = "FAIL"
        elif states == {"skipped"}:
            verdict = "SKIP"
        else:
            verdict = "PASS"
        seconds = sum(d for _, d in tests.values())
        terminalreporter.write_line(f"criterion {number}: {verdict} ({seconds:.2f} s) [{', '.join(tests)}]")
