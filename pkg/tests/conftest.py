import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hybridsizing.model import ScenarioConfig  # noqa: E402
from hybridsizing.synthetic import desk_instance, small_instance  # noqa: E402


@pytest.fixture
def desk():
    return desk_instance()


@pytest.fixture
def config():
    return ScenarioConfig()


@pytest.fixture
def small24():
    return small_instance(24, seed=3)


@pytest.fixture(autouse=True)
def _cache_dir(tmp_path, monkeypatch):
    # never touch the user's real fetch cache
    monkeypatch.setenv("HYBRIDSIZING_CACHE_DIR", str(tmp_path / "cache"))


_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for an acceptance criterion; printed at the end of the run."""
    def record(n, ok, detail):
        _CRITERIA[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(_CRITERIA[n])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
