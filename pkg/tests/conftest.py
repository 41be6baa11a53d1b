import os
from importlib import resources

import pytest
from hypothesis import HealthCheck, settings

from aircanyon.citygml import load_city

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CORPUS = str(resources.files("aircanyon").joinpath("data/corpus"))
FIXTURES = sorted({f.rsplit(".", 1)[0] for f in os.listdir(CORPUS)})

_criteria: dict = {}


def corpus_path(name, ext="gml"):
    return os.path.join(CORPUS, f"{name}.{ext}")


@pytest.fixture
def canyon_model():
    return load_city(corpus_path("canyon_80_40"))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, text = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        prev = _criteria.get(n, (text, True))
        _criteria[n] = (text, prev[1] and rep.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        text, ok = _criteria[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {text}")
