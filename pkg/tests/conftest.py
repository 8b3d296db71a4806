from __future__ import annotations

import pytest

from cespdc.config import load_bundle
from cespdc.rubidium import load_rb_data


@pytest.fixture(scope="session")
def bundle():
    return load_bundle(preset="paper-2020")


@pytest.fixture(scope="session")
def source(bundle):
    return bundle.source


@pytest.fixture(scope="session")
def cavity(bundle):
    return bundle.source.cavity


@pytest.fixture(scope="session")
def fp(bundle):
    return bundle.fp


@pytest.fixture(scope="session")
def cell(bundle):
    return bundle.cell


@pytest.fixture(scope="session")
def rb_data():
    return load_rb_data()
