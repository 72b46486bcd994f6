"""Shared fixtures: one catalog instance and fixture-file paths."""

import time
from datetime import datetime, timezone
from pathlib import Path

import pytest

from mbsr import default_catalog, load_corpus

TESTS_DIR = Path(__file__).parent
FIXTURES_DIR = TESTS_DIR / "fixtures"
CORPUS_DIR = TESTS_DIR.parent / "fixtures"

# Wall-clock start of the whole run; the acceptance suite checks total
# runtime against its budget, so it must execute after everything else.
SESSION_T0 = time.monotonic()

STAMP = datetime(2026, 3, 14, 12, 0, 0, tzinfo=timezone.utc)


def pytest_collection_modifyitems(config, items):
    items.sort(key=lambda item: Path(str(item.fspath)).name == "test_acceptance.py")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print the acceptance checklist collected during the run."""
    import sys

    # The acceptance module may be imported as either name depending on
    # how the run was launched; read whichever instance collected lines.
    lines = []
    for name in ("test_acceptance", "tests.test_acceptance"):
        module = sys.modules.get(name)
        if module is not None and getattr(module, "VERDICT_LINES", []):
            lines = module.VERDICT_LINES
            break
    if lines:
        terminalreporter.section("acceptance checklist")
        for line in lines:
            terminalreporter.write_line(line)


def fixed_clock():
    return STAMP


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture()
def asteroid_model(catalog):
    return load_corpus(CORPUS_DIR / "asteroid.mbsr", catalog, clock=fixed_clock)


@pytest.fixture()
def tracechain_model(catalog):
    return load_corpus(CORPUS_DIR / "tracechain.mbsr", catalog, clock=fixed_clock)


@pytest.fixture()
def metrics_model(catalog):
    return load_corpus(CORPUS_DIR / "metrics10.mbsr", catalog, clock=fixed_clock)


@pytest.fixture()
def mixed_model(catalog):
    return load_corpus(CORPUS_DIR / "mixed.mbsr", catalog, clock=fixed_clock)
