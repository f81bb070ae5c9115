import pytest

from irisseg import perturblab, synthgen

_criteria = {}


@pytest.fixture(scope="session")
def default_synth():
    """Default synthetic dataset (20 eyes x 5 images, seed 42) with its true iris masks."""
    return synthgen.generate_with_masks(synthgen.SynthConfig())


@pytest.fixture(scope="session")
def default_dataset(default_synth):
    return default_synth[0]


@pytest.fixture(scope="session")
def baseline(default_dataset):
    return perturblab.evaluate(default_dataset)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    ok = _criteria.get(number, (title, True))[1]
    if report.failed or report.skipped:
        ok = False
    elif report.when == "setup":
        return
    _criteria[number] = (title, ok and report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}")
