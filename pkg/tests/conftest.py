import os
from functools import lru_cache

import pytest

from rotsys.cnf import BaseOptions, build_base
from rotsys.solver import enumerate_all

LONG = os.environ.get("ROTSYS_LONG") == "1"


@lru_cache(maxsize=None)
def classes(n, subclasses=()):
    """Canonical representatives of the drawable classes (optionally a subclass)."""
    return tuple(enumerate_all(build_base(n, BaseOptions(subclasses=subclasses))))


@pytest.fixture(scope="session")
def drawable():
    return {n: classes(n) for n in (4, 5, 6)}


def pytest_collection_modifyitems(config, items):
    if LONG:
        return
    skip = pytest.mark.skip(reason="long target; set ROTSYS_LONG=1")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


ACCEPTANCE = []  # (criterion, passed, detail), filled by test_acceptance


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
