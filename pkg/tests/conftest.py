import numpy as np
import pytest

from sqann import Dataset

# ---------------------------------------------------------------------------
# Acceptance reporting: tests tagged @pytest.mark.criterion(n, "...") are
# aggregated into one PASS/FAIL line per criterion at the end of the run.

_acceptance: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(num, desc): tag a test as part of an acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    num, desc = marker.args
    entry = _acceptance.setdefault(num, {"desc": desc, "outcomes": []})
    if report.when == "setup" and report.skipped:
        entry["outcomes"].append("skip")
    elif report.when == "call":
        if hasattr(report, "wasxfail"):
            entry["outcomes"].append("xfail" if report.skipped else "fail")
        elif report.skipped:
            entry["outcomes"].append("skip")
        elif report.failed:
            entry["outcomes"].append("fail")
        else:
            entry["outcomes"].append("pass")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_acceptance):
        entry = _acceptance[num]
        outcomes = entry["outcomes"]
        if any(o == "fail" for o in outcomes):
            status = "FAIL"
        elif outcomes and all(o == "skip" for o in outcomes):
            status = "SKIP"
        else:
            status = "PASS"
        notes = []
        n_xfail = sum(o == "xfail" for o in outcomes)
        n_skip = sum(o == "skip" for o in outcomes)
        if n_xfail:
            notes.append(f"{n_xfail} reference values are documented source errata (strict xfail)")
        if n_skip:
            notes.append(f"{n_skip} part(s) skipped: required data not available")
        suffix = f"  [{'; '.join(notes)}]" if notes else ""
        terminalreporter.write_line(f"criterion {num:>2}: {status}{suffix}  {entry['desc']}")


@pytest.fixture
def c3_dataset() -> Dataset:
    """Three-point scalar dataset whose construction works out by hand."""
    return Dataset.from_arrays([[1.0], [0.5], [0.0]], [1.0, 2.0, 3.0])


@pytest.fixture
def quad_arrays():
    """The four-sample 2-D worked example: two clusters with outputs 1 and 0."""
    X = np.array([[1.0, 1.2], [1.2, 0.8], [-1.0, -1.0], [-1.2, -1.2]])
    Y = np.array([1.0, 1.0, 0.0, 0.0])
    return X, Y


@pytest.fixture
def quad_dataset(quad_arrays) -> Dataset:
    X, Y = quad_arrays
    return Dataset.from_arrays(X, Y)


@pytest.fixture
def write_csv(tmp_path):
    def _write(name: str, text: str) -> str:
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return _write
