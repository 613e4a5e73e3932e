"""Isotropic hardening law R(p) = Q (1 - exp(-b p))."""
from typing import Union

import numpy as np

from src.errors import ParameterDomainError
from src.material.params import MaterialParams

Scalar = Union[float, np.ndarray]


def saturation(p: Scalar, Q: float, b: float) -> Scalar:
    """Unchecked R(p); used inside the solvers where p >= 0 holds by construction."""
    return -Q * np.expm1(-b * p)


def isotropic_hardening(p: Scalar, params: MaterialParams) -> Scalar:
    """
    Isotropic hardening R(p) for cumulative plastic strain p.

    Args:
        p: Cumulative plastic strain (>= 0), scalar or array
        params: Material parameters (Q, b)

    Returns:
        R(p) in MPa, 0 <= R < Q

    Raises:
        ParameterDomainError: If any p is negative.
    """
    arr = np.asarray(p, dtype=np.float64)
    if np.any(arr < 0.0):
        raise ParameterDomainError(f"Cumulative plastic strain must be >= 0, got min {arr.min()}")
    value = saturation(arr, params.Q, params.b)
    return float(value) if value.ndim == 0 else value
