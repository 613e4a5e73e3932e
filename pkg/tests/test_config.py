"""Tests for configuration loading and validation."""
from pathlib import Path

import pytest
import yaml

from src.config import (
    ConfigLoader,
    get_logging_config,
    get_material_params,
    get_pipeline_config,
    get_solver_settings,
    get_surrogate_config,
)
from src.errors import InputError, ParameterDomainError


def _write(tmp_path: Path, name: str, config: dict) -> ConfigLoader:
    config_file = tmp_path / name
    with open(config_file, "w", encoding="utf-8") as f:
        yaml.dump(config, f)
    return ConfigLoader(str(config_file))


def _minimal(**sections) -> dict:
    config = {"material": {"preset": "notched_plate"}, "solver": {}, "pipeline": {}, "surrogate": {}}
    config.update(sections)
    return config


class TestConfigLoaderBasics:
    """Tests for basic ConfigLoader functionality."""

    def test_config_loader_init(self, test_config_yaml: Path):
        """ConfigLoader should initialize with valid YAML file."""
        loader = ConfigLoader(str(test_config_yaml))
        assert loader.raw["material"]["preset"] == "notched_plate"

    def test_config_loader_missing_file(self):
        """ConfigLoader should raise FileNotFoundError for missing file."""
        with pytest.raises(FileNotFoundError):
            ConfigLoader("/nonexistent/path/config.yaml")

    def test_config_loader_missing_section(self, tmp_path: Path):
        """Missing required sections are input errors."""
        with pytest.raises(InputError, match="Missing required config section"):
            _write(tmp_path, "invalid.yaml", {"material": {"preset": "notched_plate"}})

    def test_config_loader_bad_yaml(self, tmp_path: Path):
        """Unparseable YAML is an input error."""
        config_file = tmp_path / "broken.yaml"
        config_file.write_text("material: [unclosed\n", encoding="utf-8")
        with pytest.raises(InputError, match="Invalid YAML"):
            ConfigLoader(str(config_file))

    def test_config_loader_non_mapping(self, tmp_path: Path):
        """A YAML list at the root is rejected."""
        config_file = tmp_path / "list.yaml"
        config_file.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(InputError, match="mapping"):
            ConfigLoader(str(config_file))

    def test_repository_default_config(self):
        """The shipped default config loads and builds every section."""
        loader = ConfigLoader(str(Path(__file__).resolve().parents[1] / "configs" / "default.yaml"))
        params = get_material_params(loader)
        assert params.sigma_y > 0.0
        assert get_solver_settings(loader, params).max_newton_iters >= 1
        assert get_pipeline_config(loader)["mode"] == "direct"
        assert get_surrogate_config(loader)["n_s"] >= 2


class TestConfigLoaderDotNotation:
    """Tests for dot-notation config access."""

    def test_get_nested_key(self, test_config_yaml: Path):
        """Get nested key with dot notation."""
        loader = ConfigLoader(str(test_config_yaml))
        assert loader.get("solver.max_newton_iters") == 50

    def test_get_nonexistent_key_with_default(self, test_config_yaml: Path):
        """Get nonexistent key should return default."""
        loader = ConfigLoader(str(test_config_yaml))
        assert loader.get("nonexistent.key", "default_value") == "default_value"

    def test_get_partial_path_through_scalar(self, test_config_yaml: Path):
        """Walking past a scalar returns the default."""
        loader = ConfigLoader(str(test_config_yaml))
        assert loader.get("solver.max_newton_iters.deep", "fallback") == "fallback"

    def test_get_list_value(self, test_config_yaml: Path):
        """Get list values."""
        loader = ConfigLoader(str(test_config_yaml))
        assert loader.get("pipeline.qois")[0] == "p_final"

    def test_env_substitution(self, tmp_path: Path, monkeypatch):
        """${VAR} strings resolve from the environment."""
        monkeypatch.setenv("PLASTCORR_TEST_LOG", "/tmp/run.log")
        loader = _write(tmp_path, "env.yaml", _minimal(logging={"file": "${PLASTCORR_TEST_LOG}"}))
        assert loader.get("logging.file") == "/tmp/run.log"


class TestMaterialConfig:
    """Tests for get_material_params."""

    def test_preset_with_override(self, tmp_path: Path):
        """Explicit values override the preset."""
        loader = _write(tmp_path, "m.yaml", _minimal(material={"preset": "notched_plate", "sigma_y": 150.0}))
        params = get_material_params(loader)
        assert params.sigma_y == 150.0
        assert params.C == 40000.0

    def test_invalid_material_raises(self, tmp_path: Path):
        """Material values are not silently replaced."""
        loader = _write(tmp_path, "m.yaml", _minimal(material={"preset": "notched_plate", "poisson_ratio": 0.7}))
        with pytest.raises(ParameterDomainError):
            get_material_params(loader)

    def test_material_not_mapping(self, tmp_path: Path):
        """A scalar material section is an input error."""
        loader = _write(tmp_path, "m.yaml", _minimal(material="notched_plate"))
        with pytest.raises(InputError, match="mapping"):
            get_material_params(loader)


class TestSolverConfig:
    """Tests for get_solver_settings validation and safe defaults."""

    def test_tolerance_relative_to_yield(self, test_config_yaml: Path):
        """fy_tolerance is relative_tolerance * sigma_y."""
        settings = get_solver_settings(ConfigLoader(str(test_config_yaml)))
        assert settings.fy_tolerance == pytest.approx(1e-7)

    @pytest.mark.parametrize(
        "solver,key,expected",
        [
            ({"max_newton_iters": 0}, "max_newton_iters", 50),
            ({"max_newton_iters": "many"}, "max_newton_iters", 50),
            ({"fd_step": 0.5}, "fd_step", 1e-8),
        ],
    )
    def test_out_of_range_falls_back(self, tmp_path: Path, solver, key, expected):
        """Invalid solver values fall back to the defaults."""
        loader = _write(tmp_path, "s.yaml", _minimal(solver=solver))
        assert getattr(get_solver_settings(loader), key) == expected

    def test_empty_section(self, tmp_path: Path):
        """Empty solver section uses all defaults."""
        settings = get_solver_settings(_write(tmp_path, "s.yaml", _minimal()))
        assert settings.max_newton_iters == 50
        assert settings.bisection_fallback is True


class TestPipelineConfig:
    """Tests for get_pipeline_config validation and safe defaults."""

    def test_defaults(self, tmp_path: Path, monkeypatch):
        """Empty pipeline section uses all defaults."""
        monkeypatch.delenv("PLASTCORR_WORKERS", raising=False)
        pipeline = get_pipeline_config(_write(tmp_path, "p.yaml", _minimal()))
        assert pipeline["workers"] == 1
        assert pipeline["chunk_size"] == 4096
        assert pipeline["mode"] == "direct"
        assert pipeline["cycle_index"] == -1

    def test_workers_from_environment(self, tmp_path: Path, monkeypatch):
        """PLASTCORR_WORKERS sets the default worker count."""
        monkeypatch.setenv("PLASTCORR_WORKERS", "6")
        assert get_pipeline_config(_write(tmp_path, "p.yaml", _minimal()))["workers"] == 6

    def test_invalid_values_fall_back(self, tmp_path: Path, monkeypatch):
        """Bad chunk size, mode and QoI list fall back to defaults."""
        monkeypatch.delenv("PLASTCORR_WORKERS", raising=False)
        loader = _write(tmp_path, "p.yaml", _minimal(pipeline={
            "chunk_size": -5, "mode": "turbo", "qois": "p_final", "max_failure_fraction": 3.0,
        }))
        pipeline = get_pipeline_config(loader)
        assert pipeline["chunk_size"] == 4096
        assert pipeline["mode"] == "direct"
        assert pipeline["qois"][0] == "p_final" and len(pipeline["qois"]) == 5
        assert pipeline["max_failure_fraction"] == 0.01


class TestSurrogateAndLoggingConfig:
    """Tests for get_surrogate_config and get_logging_config."""

    def test_surrogate_values(self, test_config_yaml: Path):
        """Values from the test YAML are kept."""
        surrogate = get_surrogate_config(ConfigLoader(str(test_config_yaml)))
        assert surrogate["n_s"] == 40
        assert surrogate["restarts"] == 2
        assert surrogate["extrapolation_guard"] == 1.0
        assert surrogate["onset_samples"] == 8

    def test_surrogate_n_s_too_low(self, tmp_path: Path):
        """n_s < 2 falls back to 150."""
        loader = _write(tmp_path, "g.yaml", _minimal(surrogate={"n_s": 1}))
        assert get_surrogate_config(loader)["n_s"] == 150

    def test_onset_samples(self, tmp_path: Path):
        """onset_samples defaults to 16; 0 is kept and negatives fall back."""
        assert get_surrogate_config(_write(tmp_path, "a.yaml", _minimal()))["onset_samples"] == 16
        loader = _write(tmp_path, "b.yaml", _minimal(surrogate={"onset_samples": 0}))
        assert get_surrogate_config(loader)["onset_samples"] == 0
        loader = _write(tmp_path, "c.yaml", _minimal(surrogate={"onset_samples": -3}))
        assert get_surrogate_config(loader)["onset_samples"] == 16

    def test_log_level_from_environment(self, test_config_yaml: Path, monkeypatch):
        """LOG_LEVEL overrides the config file."""
        monkeypatch.setenv("LOG_LEVEL", "WARNING")
        assert get_logging_config(ConfigLoader(str(test_config_yaml)))["level"] == "WARNING"

    def test_log_level_from_file(self, test_config_yaml: Path, monkeypatch):
        """Without LOG_LEVEL the file value is used."""
        monkeypatch.delenv("LOG_LEVEL", raising=False)
        logging_config = get_logging_config(ConfigLoader(str(test_config_yaml)))
        assert logging_config["level"] == "DEBUG"
        assert logging_config["file"] is None
