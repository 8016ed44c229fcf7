import numpy as np
import pytest

from scadda.io import generate_toy_dataset

ACCEPTANCE = {}


@pytest.fixture(scope="session")
def toy():
    return generate_toy_dataset(42)


@pytest.fixture
def record():
    """Store a one-line acceptance verdict, printed in the terminal summary."""
    def _record(number, ok, detail):
        ACCEPTANCE[number] = (bool(ok), detail)
    return _record


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
