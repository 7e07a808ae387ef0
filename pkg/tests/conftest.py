from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from labskit.core import build_energy_table, enumerate_terms

_tables = {}
_instances = {}


@pytest.fixture(scope="session")
def table():
    def get(n: int):
        if n not in _tables:
            _tables[n] = build_energy_table(n)
        return _tables[n]

    return get


@pytest.fixture(scope="session")
def instance():
    def get(n: int):
        if n not in _instances:
            _instances[n] = enumerate_terms(n)
        return _instances[n]

    return get
