import os
import yaml

try:
    from yaml import CSafeLoader as SafeLoader
except ImportError:
    from yaml import SafeLoader
from pathlib import Path
from typing import Dict, Any, Optional
from dotenv import load_dotenv
from loguru import logger

from src.corrector.state import SolverSettings
from src.errors import InputError
from src.material.params import MaterialParams

# Load environment variables from .env (silently fail if file doesn't exist or no permission)
try:
    env_path = os.path.join(os.path.dirname(os.path.dirname(__file__)), ".env")
    load_dotenv(dotenv_path=env_path, override=False)
except (PermissionError, FileNotFoundError):
    pass


def _env_int(name: str, default: int) -> int:
    try:
        value = int(os.getenv(name, default))
        return value if value >= 1 else default
    except (TypeError, ValueError):
        return default


LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
CONFIG_FILE = os.getenv("CONFIG_FILE", str(Path(__file__).resolve().parents[1] / "configs" / "default.yaml"))

REQUIRED_SECTIONS = ["material", "solver", "pipeline", "surrogate"]


class ConfigLoader:
    """Loads and validates YAML configuration with environment variable substitution."""

    def __init__(self, config_path: str):
        self.config_path = Path(config_path)
        self._config: Optional[Dict[str, Any]] = None
        self._load()

    def _load(self):
        """Load YAML config file."""
        if not self.config_path.exists():
            raise FileNotFoundError(f"Config file not found: {self.config_path}")

        with open(self.config_path, "r", encoding="utf-8") as f:
            content = f.read()
            try:
                self._config = yaml.load(content, Loader=SafeLoader) or {}
            except yaml.YAMLError as e:
                raise InputError(f"Invalid YAML in {self.config_path}: {e}") from e

        if not isinstance(self._config, dict):
            raise InputError(f"Config root must be a mapping: {self.config_path}")

        for section in REQUIRED_SECTIONS:
            if section not in self._config:
                raise InputError(f"Missing required config section: {section}")

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get config value by dot-notation path.
        Example: config.get('solver.max_newton_iters') -> 50
        """
        keys = key_path.split(".")
        value = self._config

        for key in keys:
            if isinstance(value, dict):
                value = value.get(key)
                if value is None:
                    return default
            else:
                return default

        # ${VAR} strings resolve from the environment
        if isinstance(value, str) and value.startswith("${") and value.endswith("}"):
            env_var = value[2:-1]
            return os.getenv(env_var, default)

        return value

    @property
    def raw(self) -> Dict[str, Any]:
        """Get raw config dict."""
        return self._config


# Global config instance (lazy-loaded)
_config_instance: Optional[ConfigLoader] = None


def get_config() -> ConfigLoader:
    """Get global config instance (singleton pattern)."""
    global _config_instance
    if _config_instance is None:
        _config_instance = ConfigLoader(CONFIG_FILE)
    return _config_instance


def reload_config(config_path: Optional[str] = None) -> ConfigLoader:
    """Reload config from file (CLI --config points it elsewhere)."""
    global _config_instance, CONFIG_FILE
    if config_path:
        CONFIG_FILE = config_path
    _config_instance = ConfigLoader(CONFIG_FILE)
    return _config_instance


def _validate_numeric(
    config: Dict,
    key: str,
    default: Any,
    min_val: float,
    max_val: float,
    cast_fn=float,
) -> None:
    """
    Validate and sanitize a numeric config value in-place.

    Args:
        config: Config dict to modify
        key: Key to validate
        default: Default value if invalid
        min_val: Minimum allowed value (exclusive)
        max_val: Maximum allowed value (exclusive)
        cast_fn: Type cast function (int or float)
    """
    try:
        value = cast_fn(config.get(key, default))
        if value <= min_val or value >= max_val:
            logger.warning(f"Config value {key}={value} out of range ({min_val}, {max_val}), using {default}")
            config[key] = default
            return
        config[key] = value
    except (ValueError, TypeError):
        logger.warning(f"Config value {key}={config.get(key)!r} is not numeric, using {default}")
        config[key] = default


def get_logging_config(config: Optional[ConfigLoader] = None) -> Dict[str, Any]:
    config = config or get_config()
    return {
        "level": os.getenv("LOG_LEVEL") or config.get("logging.level", LOG_LEVEL),
        "file": config.get("logging.file"),
    }


def get_material_params(config: Optional[ConfigLoader] = None) -> MaterialParams:
    """Material parameters (preset and/or explicit values). Invalid values raise."""
    section = (config or get_config()).get("material", {}) or {}
    if not isinstance(section, dict):
        raise InputError("Config section 'material' must be a mapping")
    return MaterialParams.from_dict(section)


def get_solver_settings(
    config: Optional[ConfigLoader] = None,
    params: Optional[MaterialParams] = None,
) -> SolverSettings:
    """Solver controls with safe defaults; tolerance is relative to sigma_y."""
    solver_config = dict((config or get_config()).get("solver", {}) or {})
    solver_config.setdefault("relative_tolerance", 1e-9)
    solver_config.setdefault("max_newton_iters", 50)
    solver_config.setdefault("fd_step", 1e-8)
    solver_config.setdefault("bisection_fallback", True)

    _validate_numeric(solver_config, "relative_tolerance", 1e-9, min_val=0, max_val=1e-2)
    _validate_numeric(solver_config, "max_newton_iters", 50, min_val=0, max_val=10001, cast_fn=int)
    _validate_numeric(solver_config, "fd_step", 1e-8, min_val=0, max_val=1e-2)

    params = params or get_material_params(config)
    return SolverSettings.for_material(
        params,
        relative_tolerance=solver_config["relative_tolerance"],
        max_newton_iters=solver_config["max_newton_iters"],
        fd_step=solver_config["fd_step"],
        bisection_fallback=bool(solver_config["bisection_fallback"]),
    )


def get_pipeline_config(config: Optional[ConfigLoader] = None) -> Dict[str, Any]:
    """Field-run config with validation and safe defaults."""
    pipeline_config = dict((config or get_config()).get("pipeline", {}) or {})

    default_workers = _env_int("PLASTCORR_WORKERS", 1)
    pipeline_config.setdefault("workers", default_workers)
    pipeline_config.setdefault("chunk_size", 4096)
    pipeline_config.setdefault("max_failure_fraction", 0.01)
    pipeline_config.setdefault("qois", ["p_final", "e_p_final", "delta_p", "dissipation", "j_max"])
    pipeline_config.setdefault("snapshots", [])
    pipeline_config.setdefault("cycle_index", -1)
    pipeline_config.setdefault("mode", "direct")

    _validate_numeric(pipeline_config, "workers", default_workers, min_val=0, max_val=1025, cast_fn=int)
    _validate_numeric(pipeline_config, "chunk_size", 4096, min_val=0, max_val=10**8, cast_fn=int)
    _validate_numeric(pipeline_config, "max_failure_fraction", 0.01, min_val=-1e-12, max_val=1.0 + 1e-12)

    if pipeline_config["mode"] not in ("direct", "surrogate"):
        logger.warning(f"Unknown pipeline mode {pipeline_config['mode']!r}, using 'direct'")
        pipeline_config["mode"] = "direct"
    if not isinstance(pipeline_config["qois"], list) or not pipeline_config["qois"]:
        pipeline_config["qois"] = ["p_final", "e_p_final", "delta_p", "dissipation", "j_max"]
    if not isinstance(pipeline_config["snapshots"], list):
        pipeline_config["snapshots"] = []

    return pipeline_config


def get_surrogate_config(config: Optional[ConfigLoader] = None) -> Dict[str, Any]:
    """Surrogate training recipe with validation and safe defaults."""
    surrogate_config = dict((config or get_config()).get("surrogate", {}) or {})

    surrogate_config.setdefault("n_s", 150)
    surrogate_config.setdefault("s_plus", 12.0)
    surrogate_config.setdefault("floor_value", 1e-12)
    surrogate_config.setdefault("restarts", 5)
    surrogate_config.setdefault("seed", 0)
    surrogate_config.setdefault("extrapolation_guard", 1.0)
    surrogate_config.setdefault("qoi", "e_p_final")
    surrogate_config.setdefault("onset_samples", 16)

    _validate_numeric(surrogate_config, "n_s", 150, min_val=1, max_val=100001, cast_fn=int)
    _validate_numeric(surrogate_config, "s_plus", 12.0, min_val=1e-3, max_val=1e6)
    _validate_numeric(surrogate_config, "floor_value", 1e-12, min_val=0, max_val=1.0)
    _validate_numeric(surrogate_config, "restarts", 5, min_val=-1, max_val=1001, cast_fn=int)
    _validate_numeric(surrogate_config, "seed", 0, min_val=-1, max_val=2**32, cast_fn=int)
    _validate_numeric(surrogate_config, "extrapolation_guard", 1.0, min_val=0, max_val=1e3)
    _validate_numeric(surrogate_config, "onset_samples", 16, min_val=-1, max_val=10001, cast_fn=int)

    return surrogate_config

