"""
Material constants of the Chaboche J2 model (elasticity, yield, hardening).
"""
import math
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, Tuple

from src.errors import ParameterDomainError


# Named parameter sets. Poisson's ratio is not part of either published set,
# so it stays a user input with a 0.3 default.
MATERIAL_PRESETS: Dict[str, Dict[str, float]] = {
    # Notched plate / spherical pores
    "notched_plate": {
        "youngs_modulus": 200000.0,
        "sigma_y": 100.0,
        "b": 10.0,
        "Q": 100.0,
        "C": 40000.0,
        "D": 400.0,
    },
    # Cast AlSi7Mg0.3 with tomography pores
    "porous_alsi": {
        "youngs_modulus": 75500.0,
        "sigma_y": 170.0,
        "b": 19.0,
        "Q": 20.0,
        "C": 127499.0,
        "D": 1334.0,
    },
}

DEFAULT_POISSON_RATIO = 0.3


def lame_from_engineering(E: float, nu: float) -> Tuple[float, float]:
    """
    Convert Young's modulus and Poisson's ratio into Lamé coefficients.

    Args:
        E: Young's modulus [MPa], must be > 0
        nu: Poisson's ratio, must satisfy -1 < nu < 0.5

    Returns:
        (lambda, mu) in MPa

    Raises:
        ParameterDomainError: If E or nu is out of range.
    """
    if not (math.isfinite(E) and E > 0.0):
        raise ParameterDomainError(f"Young's modulus must be > 0, got {E}")
    if not (math.isfinite(nu) and -1.0 < nu < 0.5):
        raise ParameterDomainError(f"Poisson's ratio must be in (-1, 0.5), got {nu}")

    mu = E / (2.0 * (1.0 + nu))
    lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    return lam, mu


@dataclass(frozen=True)
class MaterialParams:
    """Elastic constants, yield stress and Chaboche hardening parameters (MPa)."""
    youngs_modulus: float
    poisson_ratio: float
    sigma_y: float
    C: float = 0.0
    D: float = 0.0
    Q: float = 0.0
    b: float = 0.0
    mu: float = field(init=False)
    lam: float = field(init=False)

    def __post_init__(self):
        lam, mu = lame_from_engineering(self.youngs_modulus, self.poisson_ratio)

        if not (math.isfinite(self.sigma_y) and self.sigma_y > 0.0):
            raise ParameterDomainError(f"sigma_y must be > 0, got {self.sigma_y}")
        for name in ("C", "D", "Q", "b"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ParameterDomainError(f"{name} must be >= 0, got {value}")

        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "lam", lam)

    @property
    def kinematic_saturation(self) -> float:
        """Asymptotic back-stress norm C/D (inf without recall term)."""
        if self.D == 0.0:
            return math.inf
        return self.C / self.D

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MaterialParams":
        """
        Build from a mapping. A `preset` key loads a named set first;
        explicit keys override it.
        """
        values: Dict[str, Any] = {}
        preset = data.get("preset")
        if preset:
            if preset not in MATERIAL_PRESETS:
                raise ParameterDomainError(
                    f"Unknown material preset '{preset}' (known: {', '.join(MATERIAL_PRESETS)})"
                )
            values.update(MATERIAL_PRESETS[preset])

        for key in ("youngs_modulus", "poisson_ratio", "sigma_y", "C", "D", "Q", "b"):
            if data.get(key) is not None:
                values[key] = data[key]
        values.setdefault("poisson_ratio", DEFAULT_POISSON_RATIO)

        missing = [k for k in ("youngs_modulus", "sigma_y") if k not in values]
        if missing:
            raise ParameterDomainError(f"Missing material parameters: {', '.join(missing)}")

        try:
            return cls(**{k: float(v) for k, v in values.items()})
        except (TypeError, ValueError) as e:
            if isinstance(e, ParameterDomainError):
                raise
            raise ParameterDomainError(f"Invalid material parameter value: {e}") from e

    @classmethod
    def preset(cls, name: str, poisson_ratio: float = DEFAULT_POISSON_RATIO) -> "MaterialParams":
        return cls.from_dict({"preset": name, "poisson_ratio": poisson_ratio})

    def to_dict(self) -> Dict[str, float]:
        data = asdict(self)
        data.pop("mu")
        data.pop("lam")
        return data
