from pathlib import Path

import pytest
from hypothesis import settings

ROOT = Path(__file__).resolve().parents[1]
CORPUS = ROOT / "corpus"

settings.register_profile("repo", deadline=None, max_examples=60)
settings.load_profile("repo")

_criterion_lines = {}


@pytest.fixture
def corpus_path():
    return lambda name: CORPUS / f"{name}.spec"


@pytest.fixture
def record_criterion():
    """Remember a criterion's pass/fail line for the end-of-run summary."""
    def record(result):
        _criterion_lines[result.number] = result.line()
        print(result.line())
    return record


def pytest_terminal_summary(terminalreporter):
    if not _criterion_lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_criterion_lines):
        terminalreporter.write_line(_criterion_lines[k])
