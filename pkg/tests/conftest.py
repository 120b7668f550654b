"""Pytest configuration and fixtures for cubictele tests."""

import json
import tempfile
from pathlib import Path

import numpy as np
import pytest

from cubictele.core.oracle import validation_params
from cubictele.core.params import (
    GridSpec,
    squeezing_db_to_r,
    suggest_grids,
    teleport_params,
)
from cubictele.core.heisenberg import balanced_weight
from cubictele.core.teleport import SweepResult, TeleportEngine


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


def _balanced_params(alpha, squeeze_db=-15.0, gamma=0.1, input_state=None):
    r = squeezing_db_to_r(squeeze_db)
    return teleport_params(r, gamma, alpha, balanced_weight(gamma, alpha, r), input_state)


@pytest.fixture(scope="session")
def balanced_params():
    """Factory for teleport-mode parameters with the balanced CZ weight."""
    return _balanced_params


@pytest.fixture(scope="session")
def small_params():
    """Reduced-squeezing point (r 0.8, alpha 10) whose grids are cheap."""
    return validation_params()


@pytest.fixture(scope="session")
def small_grids(small_params):
    return suggest_grids(small_params)


@pytest.fixture(scope="session")
def small_engine(small_params, small_grids):
    """Engine at the reduced-squeezing point, shared read-only across tests."""
    return TeleportEngine(small_params, small_grids)


@pytest.fixture(scope="session")
def params_alpha20():
    return _balanced_params(20.0)


@pytest.fixture
def vacuum_grid():
    return GridSpec(-10.0, 10.0, 1024)


@pytest.fixture
def synthetic_sweep():
    """Hand-built sweep result with one NaN fidelity and a uniform density."""
    y1m = np.linspace(0.0, 10.0, 11)
    yinm = np.array([0.0, 1.0])
    P = np.full((11, 2), 0.1)
    F = np.full((11, 2), 0.995)
    F[:5] = 0.5
    F[0, 0] = np.nan
    return SweepResult(y1m, yinm, P, F, total_probability=1.0, postselect_stats={5.0: 0.5})


@pytest.fixture
def run_config_file(temp_dir):
    """Small sweep configuration at the reduced-squeezing point."""
    config = {
        "params": {"r": 0.8, "gamma": 0.1, "alpha": 10.0, "g": "balanced", "input_state": {"kind": "vacuum"}},
        "lattice": {"n_y1m": 8, "n_yinm": 8},
        "thresholds": [5.0],
        "mc_samples": 5000,
        "outputs": {"dir": str(temp_dir / "results"), "formats": ["csv", "json"]},
    }
    config_file = temp_dir / "run.json"
    with open(config_file, "w") as f:
        json.dump(config, f)
    return config_file
