import contextlib
import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=300)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


_RESULTS = pytest.StashKey[dict]()


class AcceptanceRecorder:
    def __init__(self, results: dict):
        self.results = results
        self.detail = ""

    @contextlib.contextmanager
    def __call__(self, number: int, title: str):
        self.detail = ""
        try:
            yield self
        except BaseException:
            self._record(number, title, "FAIL")
            raise
        self._record(number, title, "PASS")

    def _record(self, number, title, verdict):
        line = f"criterion {number:2d} {verdict}  {title}" + (f"  [{self.detail}]" if self.detail else "")
        self.results[number] = line
        print(line)


@pytest.fixture
def acceptance(request):
    return AcceptanceRecorder(request.config.stash.setdefault(_RESULTS, {}))


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, {})
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
