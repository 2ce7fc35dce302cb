import sys
import warnings
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from osekenv.project import PROPERTY_1, default_project, fixture_path  # noqa: E402
from osekenv.scenario import load_bindings  # noqa: E402
from osekenv.slicer import slice  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def project():
    return default_project()


@pytest.fixture(scope="session")
def graph(project):
    return project.graph


@pytest.fixture(scope="session")
def cfg(project):
    return project.cfg


@pytest.fixture(scope="session")
def bindings():
    return load_bindings(fixture_path("end_bindings.tsv"))


@pytest.fixture(scope="session")
def sr(graph):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return slice(PROPERTY_1, graph)


def golden(name: str) -> str:
    return (GOLDEN / name).read_text(encoding="utf-8")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
