"""
Pytest configuration and fixtures for gaugeline tests.
"""

import os
import tempfile
from pathlib import Path
from unittest.mock import patch

import pytest

from gaugeline import envelope
from gaugeline.gauge import make_builtin


@pytest.fixture
def temp_dir():
    """Create a temporary directory for testing."""
    with tempfile.TemporaryDirectory() as tmp_dir:
        yield Path(tmp_dir)


@pytest.fixture
def mock_env_vars():
    """Mock environment variables for testing."""
    env_vars = {
        "LOG_LEVEL": "DEBUG",
        "ENABLE_FILE_LOG": "true",
        "ENABLE_CONSOLE_LOG": "false",
        "LOG_ENABLE_TRACEBACK": "true",
        "BASE_PATH": "/tmp/test_data",
        "MODULE_NAME": "test-module",
        "DEFER_LOG_LEVEL": "ERROR",
        "GRID_STEP": "0.001",
        "BCP_TRUNCATION": "12",
    }

    with patch.dict(os.environ, env_vars, clear=False):
        yield env_vars


@pytest.fixture
def clean_env():
    """Fixture to clean environment variables for isolated testing."""
    original_env = os.environ.copy()
    env_keys_to_clear = [
        "LOG_LEVEL",
        "ENABLE_FILE_LOG",
        "ENABLE_CONSOLE_LOG",
        "LOG_ENABLE_TRACEBACK",
        "BASE_PATH",
        "MODULE_NAME",
        "DEFER_LOG_LEVEL",
        "LOG_MAX_BYTES",
        "LOG_BACKUP_COUNT",
        "GRID_STEP",
        "X_MAX",
        "BCP_TRUNCATION",
    ]
    for key in env_keys_to_clear:
        os.environ.pop(key, None)

    yield

    os.environ.clear()
    os.environ.update(original_env)


@pytest.fixture(scope="session")
def euclidean():
    return make_builtin("euclidean", check=False)


@pytest.fixture(scope="session")
def sqrt_gauge():
    return make_builtin("sqrt", check=False)


@pytest.fixture(scope="session")
def bcp20():
    """Envelope of h(1/n) <= 1/(n+1), n <= 20, on [0, 2]."""
    return envelope.envelope_builtin("bcp_envelope", {"n": 20})


@pytest.fixture(scope="session")
def nonlc2():
    """Envelope of h(a_(n+1)) <= a_n for a = (8, 512, 2^27)."""
    return envelope.envelope_builtin("nonlc_envelope", {"n": 2})


@pytest.fixture(scope="session")
def desk_nonlc():
    """Small non linearly connected envelope: a = (2, 8, 1024) on [0, 8192]."""
    constraints = envelope.nonlc_constraints([2, 8, 1024], 2, step=1.0)
    return envelope.solve_envelope(constraints, 1.0, 8192.0).gauge
