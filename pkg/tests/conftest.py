import numpy as np
import pytest
from hypothesis import strategies as st

from ambiguity.domains import Detector, DetectorDomain, Knob, KnobDomain

_results = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = getattr(report, "criterion", None)
    if marker:
        _results.append((marker[0], marker[1], report.outcome, report.duration))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m:
        rep.criterion = m.args


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, duration in sorted(_results):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} ({duration:.2f} s)")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def knob(name, n):
    return Knob(name, [f"{name.lower()}{i}" for i in range(n)])


def detector(name, n):
    return Detector(name, [str(i) for i in range(n)])


# a small fixed universe so random domains share knobs with identical settings
UNIVERSE = [knob(c, 1 + i % 3) for i, c in enumerate("ABCDEF")]

knob_domains = st.sets(st.sampled_from(UNIVERSE), max_size=len(UNIVERSE)).map(KnobDomain)


@pytest.fixture
def one_knob():
    return KnobDomain([knob("A", 2)])


@pytest.fixture
def two_atoms():
    return DetectorDomain([detector("D", 2)])
