"""Shared test fixtures and configuration."""
from pathlib import Path
from typing import Dict

import numpy as np
import pandas as pd
import pytest
import yaml

from src.corrector.load import LoadHistory, ramp_load, triangle_load
from src.corrector.state import SolverSettings
from src.material.params import MaterialParams
from src.material.tensors import deviatoric, von_mises


@pytest.fixture
def params() -> MaterialParams:
    """Notched-plate parameter set (E=200000, sigma_y=100, b=10, Q=100, C=40000, D=400)."""
    return MaterialParams.preset("notched_plate")


@pytest.fixture
def settings(params: MaterialParams) -> SolverSettings:
    """Default solver controls (|f_y| <= 1e-9 sigma_y)."""
    return SolverSettings.for_material(params)


@pytest.fixture
def ramp() -> LoadHistory:
    """Monotone ramp 0 -> 1.55 in 200 steps."""
    return ramp_load(1.55, 200)


@pytest.fixture
def cycles() -> LoadHistory:
    """Two symmetric unit triangle cycles, 25 steps per quarter."""
    return triangle_load(1.0, 2, 25)


@pytest.fixture
def test_config_dict() -> Dict:
    """Complete config mapping, small enough for fast runs."""
    return {
        "logging": {"level": "DEBUG", "file": None},
        "material": {"preset": "notched_plate", "poisson_ratio": 0.3},
        "solver": {
            "relative_tolerance": 1.0e-9,
            "max_newton_iters": 50,
            "fd_step": 1.0e-8,
            "bisection_fallback": True,
        },
        "pipeline": {
            "mode": "direct",
            "workers": 1,
            "chunk_size": 4,
            "max_failure_fraction": 0.01,
            "qois": ["p_final", "e_p_final", "delta_p", "dissipation", "j_max"],
            "snapshots": [],
            "cycle_index": -1,
        },
        "surrogate": {
            "n_s": 40,
            "s_plus": 12.0,
            "qoi": "e_p_final",
            "floor_value": 1.0e-12,
            "restarts": 2,
            "seed": 0,
            "extrapolation_guard": 1.0,
            "onset_samples": 8,
        },
    }


@pytest.fixture
def test_config_yaml(tmp_path: Path, test_config_dict: Dict) -> Path:
    """Create a temporary test config YAML file."""
    config_file = tmp_path / "test_config.yaml"
    with open(config_file, "w", encoding="utf-8") as f:
        yaml.dump(test_config_dict, f)
    return config_file


@pytest.fixture
def test_env_vars(monkeypatch, test_config_yaml: Path):
    """Point the config loader at the test config."""
    monkeypatch.setenv("CONFIG_FILE", str(test_config_yaml))
    monkeypatch.setenv("LOG_LEVEL", "DEBUG")
    monkeypatch.delenv("PLASTCORR_WORKERS", raising=False)


@pytest.fixture
def field_csv(tmp_path: Path) -> Path:
    """Scalar-only elastic field: 9 points from elastic to 12 sigma_y."""
    svm = [0.0, 50.0, 99.0, 150.0, 200.0, 400.0, 800.0, 1000.0, 1200.0]
    df = pd.DataFrame({"id": [f"p{j}" for j in range(len(svm))], "svm": svm})
    path = tmp_path / "field.csv"
    df.to_csv(path, index=False)
    return path


@pytest.fixture
def tensor_field_csv(tmp_path: Path) -> Path:
    """Elastic field with deviatoric columns and trace."""
    directions = np.array([
        [2.0, -1.0, -1.0, 0.0, 0.0, 0.0],
        [1.0, -0.4, -0.6, 0.3, -0.2, 0.5],
        [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
    ])
    dev = deviatoric(directions)
    scale = np.array([150.0, 300.0, 80.0]) / von_mises(dev)
    dev = dev * scale[:, None]
    df = pd.DataFrame(dev, columns=["s11", "s22", "s33", "s12", "s13", "s23"])
    df.insert(0, "svm", von_mises(dev))
    df.insert(0, "id", ["a", "b", "c"])
    df["tr"] = [30.0, -12.0, 0.0]
    path = tmp_path / "tensor_field.csv"
    df.to_csv(path, index=False, float_format="%.17g")
    return path


@pytest.fixture
def cycles_csv(tmp_path: Path, cycles: LoadHistory) -> Path:
    """The `cycles` load history written as t,f CSV."""
    path = tmp_path / "load.csv"
    cycles.to_frame().to_csv(path, index=False, float_format="%.17g")
    return path


@pytest.fixture
def ramp_csv(tmp_path: Path) -> Path:
    """Monotone ramp to 1.0 (no complete cycle)."""
    path = tmp_path / "ramp.csv"
    ramp_load(1.0, 50).to_frame().to_csv(path, index=False, float_format="%.17g")
    return path
