import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from docexpand.gateway import BackendConfig, StubEmbedder  # noqa: E402

MINI = Path(__file__).resolve().parents[1] / "src" / "docexpand" / "data" / "mini"


@pytest.fixture
def mini_dir() -> Path:
    return MINI


@pytest.fixture
def embedder() -> StubEmbedder:
    return StubEmbedder(BackendConfig(kind="stub", dimension=32))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


_CRITERIA: dict[int, str] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    n = int(name.split("_")[2])
    if report.failed:
        _CRITERIA[n] = "FAIL"
    elif report.when == "call" and report.passed:
        _CRITERIA.setdefault(n, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {n}: {_CRITERIA[n]}")
