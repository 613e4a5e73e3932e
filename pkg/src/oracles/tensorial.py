"""
Tensorial plastic corrector used as a verification oracle.

Integrates the J2 Chaboche model in tensor form (flow rule 3/2 (sigma - X)/J,
kinematic rule dX = 2/3 C deps_p - D X dp) under the tensorial Neuber
constraint (sigma - sigma_o):(eps - eps_o) = (f - f_o)^2 sigma_sharp:eps_sharp,
with the total deviatoric strain kept along the elastic direction. It shares
no solver code with the scalar corrector: the plastic multiplier is found
with scipy's brentq and origins are tracked from the load signal directly.
"""
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
from loguru import logger
from scipy.optimize import brentq

from src.corrector.load import LoadHistory
from src.errors import ConvergenceError
from src.material.hardening import saturation
from src.material.params import MaterialParams
from src.material.tensors import CONTRACTION_WEIGHTS, deviatoric, double_contract, frobenius_norm, von_mises
from src.qoi.records import ElasticPointRecord

# A generic (non-uniaxial) unit deviatoric direction for synthetic records
GENERIC_DIRECTION = np.array([1.0, -0.4, -0.6, 0.3, -0.2, 0.5])

ZERO_STRESS_RATIO = 1e-12


def synthetic_record(sigma_vm_sharp: float, direction: Optional[np.ndarray] = None, point_id: str = "0") -> ElasticPointRecord:
    """Elastic record with the given von Mises stress along `direction` (trace 0)."""
    dev = deviatoric(GENERIC_DIRECTION if direction is None else direction)
    vm = float(von_mises(dev))
    dev = dev * (sigma_vm_sharp / vm) if vm > 0.0 else dev * 0.0
    return ElasticPointRecord(point_id, float(sigma_vm_sharp), dev, 0.0)


def _j2(tensor: np.ndarray) -> float:
    return float(np.sqrt(1.5 * np.sum(tensor * tensor * CONTRACTION_WEIGHTS)))


@dataclass
class TensorSeries:
    """Deviatoric tensor histories (n_times, 6) and cumulative plastic strain (n_times,)."""
    times: np.ndarray
    f: np.ndarray
    direction: np.ndarray           # elastic deviator at f = 1
    stress_dev: np.ndarray
    strain_dev: np.ndarray
    plastic_strain_dev: np.ndarray
    back_stress: np.ndarray
    p_hat: np.ndarray

    def scalar_projection(self, mu: float) -> Dict[str, np.ndarray]:
        """
        Scalar variables recovered by projecting on the elastic direction:
        s = sigma_d:sigma_sharp / sigma_sharp:sigma_sharp, same for e, e_p, x on eps_sharp.
        """
        sq = float(double_contract(self.direction, self.direction))
        if sq == 0.0:
            zeros = np.zeros_like(self.p_hat)
            return {"s": self.f.copy(), "e": self.f.copy(), "e_p": zeros, "p_hat": self.p_hat, "x": zeros}

        eps_sharp = self.direction / (2.0 * mu)
        eps_sq = float(double_contract(eps_sharp, eps_sharp))
        return {
            "s": double_contract(self.stress_dev, self.direction) / sq,
            "e": double_contract(self.strain_dev, eps_sharp) / eps_sq,
            "e_p": double_contract(self.plastic_strain_dev, eps_sharp) / eps_sq,
            "p_hat": self.p_hat,
            "x": double_contract(self.back_stress, eps_sharp) / eps_sq,
        }

    def alignment_error(self) -> float:
        """Largest 1 - |cos| between any non-zero tensor of the history and the elastic direction."""
        norm_d = float(frobenius_norm(self.direction))
        if norm_d == 0.0:
            return 0.0
        worst = 0.0
        for history in (self.stress_dev, self.strain_dev, self.plastic_strain_dev, self.back_stress):
            norms = frobenius_norm(history)
            nonzero = norms > ZERO_STRESS_RATIO * max(float(norms.max()), 1e-300)
            if not nonzero.any():
                continue
            cos = double_contract(history[nonzero], self.direction) / (norms[nonzero] * norm_d)
            worst = max(worst, float(np.max(1.0 - np.abs(cos))))
        return worst


def integrate_tensorial(
    record: ElasticPointRecord,
    load: LoadHistory,
    params: MaterialParams,
    xtol: float = 1e-300,
    max_bracket_doublings: int = 400,
) -> TensorSeries:
    """
    Backward-Euler integration of the tensorial corrector for one point.

    Args:
        record: Elastic record with its deviator
        load: Load history
        params: Material parameters
        xtol: Absolute tolerance on the plastic multiplier for brentq

    Returns:
        TensorSeries on the samples of `load`

    Raises:
        CapabilityError: If the record is scalar-only.
        ConvergenceError: If the multiplier cannot be bracketed.
    """
    record.require_tensors("the tensorial oracle")
    mu = params.mu
    sigma_bar = record.dev_sigma_sharp
    values = load.values
    n_t = len(load)

    stress = np.zeros((n_t, 6))
    strain = np.zeros((n_t, 6))
    plastic = np.zeros((n_t, 6))
    back = np.zeros((n_t, 6))
    p_hist = np.zeros(n_t)

    norm_bar = float(frobenius_norm(sigma_bar))
    if record.sigma_vm_sharp < ZERO_STRESS_RATIO * params.sigma_y or norm_bar == 0.0:
        stress[:] = values[:, None] * sigma_bar
        strain[:] = values[:, None] * sigma_bar / (2.0 * mu)
        return TensorSeries(load.times, load.values, sigma_bar, stress, strain, plastic, back, p_hist)

    n_hat = sigma_bar / norm_bar
    # sigma_sharp : eps_sharp
    energy_bar = norm_bar * norm_bar / (2.0 * mu)

    sig = np.zeros(6)
    eps = np.zeros(6)
    eps_p = np.zeros(6)
    X = np.zeros(6)
    p = 0.0
    sig_o, eps_o, eps_p_o, f_o = np.zeros(6), np.zeros(6), np.zeros(6), 0.0

    def neuber_state(eps_p_new: np.ndarray, f_new: float, direction: float):
        beta = float(double_contract(n_hat, eps_p_new - eps_p_o))
        energy = (f_new - f_o) ** 2 * energy_bar
        eta = 0.5 * (beta + direction * np.sqrt(beta * beta + 2.0 * energy / mu))
        eps_new = eps_o + eta * n_hat
        sig_new = sig_o + 2.0 * mu * ((eps_new - eps_o) - (eps_p_new - eps_p_o))
        return sig_new, eps_new

    f_prev = 0.0
    prev_direction = 0.0
    dp_last = 0.0
    for i in range(n_t):
        f_new = float(values[i])
        if f_new != f_prev:
            direction = 1.0 if f_new > f_prev else -1.0
            if prev_direction != 0.0 and direction != prev_direction:
                sig_o, eps_o, eps_p_o, f_o = sig.copy(), eps.copy(), eps_p.copy(), f_prev
            prev_direction = direction

            sig_tr, eps_tr = neuber_state(eps_p, f_new, direction)
            j_tr = _j2(sig_tr - X)
            fy_tr = j_tr - params.sigma_y - saturation(p, params.Q, params.b)

            if fy_tr <= 0.0:
                sig, eps = sig_tr, eps_tr
            else:
                flow = 1.5 * (sig_tr - X) / j_tr
                kinematic = (2.0 / 3.0) * params.C
                d_o = eps_p - eps_p_o
                beta_0 = float(double_contract(n_hat, d_o))
                beta_flow = float(double_contract(n_hat, flow))
                root_term = 2.0 * energy_bar * (f_new - f_o) ** 2 / mu
                # sigma - X = sum_k c_k(dp) basis_k, so J^2 = 3/2 c.G.c
                basis = np.stack((sig_o - 2.0 * mu * d_o, n_hat, flow, X))
                gram = ((basis * CONTRACTION_WEIGHTS) @ basis.T).tolist()

                def update(dp: float):
                    eps_p_new = eps_p + dp * flow
                    X_new = (X + kinematic * dp * flow) / (1.0 + params.D * dp)
                    sig_new, eps_new = neuber_state(eps_p_new, f_new, direction)
                    return sig_new, eps_new, eps_p_new, X_new

                def residual(dp: float) -> float:
                    beta = beta_0 + dp * beta_flow
                    eta = 0.5 * (beta + direction * np.sqrt(beta * beta + root_term))
                    relax = 1.0 / (1.0 + params.D * dp)
                    c = (1.0, 2.0 * mu * eta, -2.0 * mu * dp - kinematic * dp * relax, -relax)
                    quad = sum(c[a] * c[b] * gram[a][b] for a in range(4) for b in range(4))
                    return np.sqrt(1.5 * max(quad, 0.0)) - params.sigma_y - saturation(p + dp, params.Q, params.b)

                # Bracket from the previous multiplier: residual(lo) > 0 >= residual(hi)
                lo, hi = 0.0, max(dp_last, 1e-12)
                for _ in range(max_bracket_doublings):
                    if residual(hi) <= 0.0:
                        break
                    lo, hi = hi, 2.0 * hi
                else:
                    raise ConvergenceError("Tensorial oracle could not bracket the plastic multiplier",
                                           point_id=record.id, time_index=i)

                dp = brentq(residual, lo, hi, xtol=xtol, rtol=4.0 * np.finfo(float).eps, maxiter=500)
                sig, eps, eps_p, X = update(dp)
                p += dp
                dp_last = dp

        f_prev = f_new
        stress[i], strain[i], plastic[i], back[i], p_hist[i] = sig, eps, eps_p, X, p

    logger.debug(f"Tensorial oracle: point {record.id}, {n_t} samples, p_final={p:.6e}")
    return TensorSeries(load.times, load.values, sigma_bar, stress, strain, plastic, back, p_hist)
