import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fdcrypt.cipher import keygen  # noqa: E402


@pytest.fixture(scope="session")
def key():
    return keygen(128, b"tests")


@pytest.fixture
def rng():
    return random.Random(1234)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, title, detail = RESULTS[n]
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict}  {title}  ({detail})")
