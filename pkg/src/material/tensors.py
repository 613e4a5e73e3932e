"""
Symmetric second-order tensor algebra on six-component arrays.

A SymTensor3 is a float array whose last axis holds (xx, yy, zz, xy, xz, yz).
Each shear component is stored once; contractions count it twice.
Leading axes are batch axes (time samples, points).
"""
from typing import Sequence, Union

import numpy as np

from src.errors import InputError

# Double-contraction weights for the once-stored off-diagonals
CONTRACTION_WEIGHTS = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])

IDENTITY = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])

DEVIATORIC_TOLERANCE = 1e-12

ArrayLike = Union[np.ndarray, Sequence[float]]


def as_sym(values: ArrayLike) -> np.ndarray:
    """Convert to a float array with a trailing axis of length 6."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape[-1:] != (6,):
        raise InputError(f"Symmetric tensor needs 6 components, got shape {arr.shape}")
    return arr


def from_matrix(matrix: ArrayLike) -> np.ndarray:
    """Pack a (..., 3, 3) symmetric matrix into six components."""
    m = np.asarray(matrix, dtype=np.float64)
    return np.stack(
        [m[..., 0, 0], m[..., 1, 1], m[..., 2, 2], m[..., 0, 1], m[..., 0, 2], m[..., 1, 2]],
        axis=-1,
    )


def to_matrix(tensor: ArrayLike) -> np.ndarray:
    """Unpack six components into a (..., 3, 3) symmetric matrix."""
    t = as_sym(tensor)
    xx, yy, zz, xy, xz, yz = np.moveaxis(t, -1, 0)
    return np.stack(
        [
            np.stack([xx, xy, xz], axis=-1),
            np.stack([xy, yy, yz], axis=-1),
            np.stack([xz, yz, zz], axis=-1),
        ],
        axis=-2,
    )


def trace(tensor: ArrayLike) -> np.ndarray:
    t = as_sym(tensor)
    return t[..., 0] + t[..., 1] + t[..., 2]


def double_contract(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    """A:B with off-diagonals counted twice."""
    return np.sum(as_sym(a) * as_sym(b) * CONTRACTION_WEIGHTS, axis=-1)


def frobenius_norm(tensor: ArrayLike) -> np.ndarray:
    t = as_sym(tensor)
    return np.sqrt(double_contract(t, t))


def deviatoric(tensor: ArrayLike) -> np.ndarray:
    """Deviatoric projection T - tr(T)/3 I (idempotent)."""
    t = as_sym(tensor)
    return t - (trace(t) / 3.0)[..., None] * IDENTITY


def is_deviatoric(tensor: ArrayLike, tolerance: float = DEVIATORIC_TOLERANCE) -> np.ndarray:
    t = as_sym(tensor)
    return np.abs(trace(t)) <= tolerance * frobenius_norm(t)


def von_mises(dev: ArrayLike) -> np.ndarray:
    """
    Von Mises norm sqrt(3/2 dev:dev) of a deviatoric tensor.

    Args:
        dev: Deviatoric tensor(s), trailing axis of 6

    Returns:
        Non-negative equivalent stress (scalar or batch array)

    Raises:
        InputError: If any input has a trace above the deviatoric tolerance.
    """
    t = as_sym(dev)
    if not np.all(is_deviatoric(t)):
        raise InputError("von_mises expects a deviatoric tensor (trace exceeds tolerance)")
    return np.sqrt(1.5 * double_contract(t, t))


def uniaxial_deviator(amplitude: float) -> np.ndarray:
    """Deviator of a uniaxial xx stress state; its von Mises norm is |amplitude|."""
    return np.array([2.0, -1.0, -1.0, 0.0, 0.0, 0.0]) * (amplitude / 3.0)
