"""
Error of the local proportionality rule against a reference stress history.
"""
from typing import Tuple

import numpy as np

from src.errors import InputError
from src.material.tensors import as_sym, double_contract, frobenius_norm


def projection_error(reference_dev_stress, dev_sigma_sharp) -> Tuple[np.ndarray, np.ndarray]:
    """
    Project a deviatoric stress history on the elastic direction.

    projected = (dev_sharp:sigma_d)/(dev_sharp:dev_sharp) dev_sharp,
    xi_rel = ||sigma_d - projected||_F / ||sigma_d||_F.

    Args:
        reference_dev_stress: (n_times, 6) deviatoric stress history
        dev_sigma_sharp: Elastic deviator at f = 1

    Returns:
        (xi_rel per sample, projected history); xi_rel is NaN where ||sigma_d|| = 0

    Raises:
        InputError: If dev_sigma_sharp is zero.
    """
    reference = np.atleast_2d(as_sym(reference_dev_stress))
    direction = as_sym(dev_sigma_sharp)
    sq = float(double_contract(direction, direction))
    if sq == 0.0:
        raise InputError("Projection direction dev_sigma_sharp is zero")

    projected = (double_contract(reference, direction) / sq)[:, None] * direction
    norms = frobenius_norm(reference)
    residual = frobenius_norm(reference - projected)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi_rel = np.where(norms > 0.0, residual / np.where(norms > 0.0, norms, 1.0), np.nan)
    return xi_rel, projected
