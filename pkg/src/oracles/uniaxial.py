"""
Strain-driven uniaxial Chaboche return mapping (1D reference for the hardening laws).
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.errors import ConvergenceError, InputError
from src.material.params import MaterialParams


@dataclass
class UniaxialResponse:
    """Axial response per sample; `isotropic` is R(p)."""
    strain: np.ndarray
    stress: np.ndarray
    plastic_strain: np.ndarray
    back_stress: np.ndarray
    p: np.ndarray
    isotropic: np.ndarray


def radial_return_uniaxial(
    strain_history: Sequence[float],
    params: MaterialParams,
    tolerance: float = 1e-10,
    max_iters: int = 50,
) -> UniaxialResponse:
    """
    Backward-Euler radial return for a prescribed axial strain history.

    Yield |sigma - X| - sigma_y - R(p) <= 0, dX = C deps_p - D X dp,
    R(p) = Q (1 - exp(-b p)). The multiplier is found by Newton with the
    analytic derivative; starts from zero strain.

    Raises:
        InputError: If the history is empty or non-finite.
        ConvergenceError: If Newton fails (carries the step index).
    """
    strain = np.asarray(strain_history, dtype=np.float64).ravel()
    if strain.size == 0 or not np.all(np.isfinite(strain)):
        raise InputError("Strain history must be a non-empty finite sequence")

    E, C, D, Q, b = params.youngs_modulus, params.C, params.D, params.Q, params.b
    tol = tolerance * params.sigma_y
    n = strain.size
    stress = np.zeros(n)
    eps_p_hist = np.zeros(n)
    X_hist = np.zeros(n)
    p_hist = np.zeros(n)

    eps_p, X, p = 0.0, 0.0, 0.0
    for i, eps in enumerate(strain):
        sig_tr = E * (eps - eps_p)
        xi = sig_tr - X
        if abs(xi) - params.sigma_y - Q * -np.expm1(-b * p) > 0.0:
            n_dir = 1.0 if xi > 0.0 else -1.0
            dp = 0.0
            for _ in range(max_iters):
                denom = 1.0 + D * dp
                g = (n_dir * sig_tr - E * dp - (n_dir * X + C * dp) / denom
                     - params.sigma_y - Q * -np.expm1(-b * (p + dp)))
                if abs(g) <= tol:
                    break
                dg = -E - (C * denom - D * (n_dir * X + C * dp)) / (denom * denom) - Q * b * np.exp(-b * (p + dp))
                dp = max(dp - g / dg, 0.5 * dp)
            else:
                raise ConvergenceError(f"Uniaxial return mapping did not converge at step {i}", time_index=i)

            eps_p += n_dir * dp
            X = (X + C * n_dir * dp) / (1.0 + D * dp)
            p += dp

        stress[i] = E * (eps - eps_p)
        eps_p_hist[i], X_hist[i], p_hist[i] = eps_p, X, p

    return UniaxialResponse(strain, stress, eps_p_hist, X_hist, p_hist, Q * -np.expm1(-b * p_hist))
