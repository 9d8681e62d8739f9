"""Shared fixtures for the codedcomp test suite."""

import os
import sys

import numpy as np
import pytest
from loguru import logger

from codedcomp.codes.constructions import mds_real_generator, rm_generator
from codedcomp.decoders.map_decoder import MapDecoder


@pytest.fixture(autouse=True)
def isolated_workspace(tmp_path, monkeypatch):
    """Point the workspace at a temporary directory and keep the environment clean."""
    for name in list(os.environ):
        if name.startswith("CODEDCOMP_"):
            monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("CODEDCOMP_WORKSPACE", str(tmp_path / "workspace"))
    monkeypatch.chdir(tmp_path)
    yield tmp_path
    logger.remove()
    logger.add(sys.stderr, level="WARNING")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def rm31():
    return rm_generator(3, 1)


@pytest.fixture(scope="session")
def rm32():
    return rm_generator(3, 2)


@pytest.fixture(scope="session")
def rm42():
    return rm_generator(4, 2)


@pytest.fixture(scope="session")
def mds84():
    return mds_real_generator(8, 4)


@pytest.fixture
def rm31_map(rm31):
    return MapDecoder(rm31)
