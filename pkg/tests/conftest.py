"""
Pytest configuration and fixtures for the test suite.

Test environment variables are loaded from .env.test (or set to defaults)
before any project module is imported, so core.config.Settings picks them up.
"""
import os
from pathlib import Path

import numpy as np
import pytest
from dotenv import load_dotenv

TEST_DIR = Path(__file__).parent
PROJECT_ROOT = TEST_DIR.parent
TEST_ENV_FILE = PROJECT_ROOT / ".env.test"

if TEST_ENV_FILE.exists():
    load_dotenv(TEST_ENV_FILE, override=True)
else:
    os.environ.setdefault("QLP_LOG_LEVEL", "WARNING")
    os.environ.setdefault("QLP_SWEEP_WORKERS", "1")
    os.environ.setdefault("QLP_SWEEP_EXECUTOR", "thread")

from domain.models import SweepConfig  # noqa: E402
from services.problem_service import generate_instance  # noqa: E402
from services.quantizer_service import make_uniform_quantizer  # noqa: E402


@pytest.fixture
def rng():
    """Fixed-seed generator for randomized checks."""
    return np.random.default_rng(20240611)


@pytest.fixture
def default_quantizer():
    """1000-level quantizer over [-10, 10]."""
    return make_uniform_quantizer(1000, -10.0, 10.0)


@pytest.fixture
def default_instance(default_quantizer):
    """Unsaturated default-size instance: n=100, m=40, k=10, r=10, 1000 levels."""
    seed = 7
    while True:
        instance = generate_instance(100, 40, 10, 10.0, default_quantizer, seed=seed)
        if instance.saturation_count == 0:
            return instance
        seed += 1


@pytest.fixture
def small_instance():
    """Small well-conditioned instance for fast solver checks."""
    quantizer = make_uniform_quantizer(2001, -10.0, 10.0)
    return generate_instance(20, 12, 2, 10.0, quantizer, seed=3)


@pytest.fixture
def tiny_sweep_config():
    """2 levels x 2 trials on a small problem, every default method."""
    return SweepConfig(n=20, m=12, k=2, r=10.0, levels_list=(100, 1000), trials=2, base_seed=5)
