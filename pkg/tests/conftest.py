from __future__ import annotations

import pytest

from topotypes.signatures import SignatureStore
from topotypes.storage import BUNDLED_CATALOG, ingest_catalog


@pytest.fixture(scope="session")
def catalog():
    return ingest_catalog(BUNDLED_CATALOG)


@pytest.fixture(scope="session")
def store():
    return SignatureStore(5)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
