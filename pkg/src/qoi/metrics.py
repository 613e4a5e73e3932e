"""
Scalar quantities of interest: cumulative plastic strain range per cycle,
intrinsic dissipation and their streaming accumulation over a field run.
"""
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.corrector.load import LoadHistory
from src.corrector.state import CorrectedSeries, StateArrays
from src.errors import InputError, ParameterDomainError
from src.material.hardening import saturation
from src.material.params import MaterialParams

QOI_NAMES = ("p_final", "e_p_final", "delta_p", "dissipation", "j_max")


def cycle_windows(load: LoadHistory) -> List[Tuple[int, int]]:
    """
    Sample windows (start, end) of the complete load cycles.

    Boundaries are sample 0 and every positive-going reversal (trough); a
    history whose last moving segment descends closes a cycle at its final
    sample. Cycle k (1-based) is windows[k - 1].
    """
    steps = np.sign(np.diff(load.values))
    boundaries = [0] + [int(r) for r in load.reversal_indices if steps[r] > 0.0]

    moving = steps[steps != 0.0]
    last = len(load) - 1
    if moving.size and moving[-1] < 0.0 and boundaries[-1] != last:
        boundaries.append(last)

    return [(a, b) for a, b in zip(boundaries[:-1], boundaries[1:]) if b > a]


def cycle_window(load: LoadHistory, cycle_index: int) -> Tuple[int, int]:
    """Window of cycle `cycle_index` (1-based; -1 selects the last complete cycle)."""
    windows = cycle_windows(load)
    if not windows:
        raise InputError("Load history contains no complete cycle")
    if cycle_index == -1:
        return windows[-1]
    if not 1 <= cycle_index <= len(windows):
        raise InputError(f"cycle_index {cycle_index} out of range (history has {len(windows)} cycle(s))")
    return windows[cycle_index - 1]


def delta_p(series: CorrectedSeries, load: LoadHistory, cycle_index: int):
    """
    Cumulative plastic strain range p_max - p_min over one cycle.

    Returns:
        float for a one-point series, (n_points,) array for a batch

    Raises:
        InputError: If the cycle does not exist.
    """
    if len(load) != series.n_times:
        raise InputError(f"Load history has {len(load)} samples, series has {series.n_times}")
    start, end = cycle_window(load, cycle_index)
    window = series.p_hat[start:end + 1]
    result = window.max(axis=0) - window.min(axis=0)
    return float(result) if np.ndim(result) == 0 else result


def dissipation_factor(
    f_y: np.ndarray,
    p_hat: np.ndarray,
    x: np.ndarray,
    sigma_vm_sharp,
    params: MaterialParams,
    dp: np.ndarray,
) -> np.ndarray:
    """
    Integrand factor f_y + sigma_y + R^2/(2Q) + D/(2C) J(X)^2 of the dissipation,
    at end-of-step values. Multiply by dp to get the step's dissipation.

    Raises:
        ParameterDomainError: If Q = 0 or C = 0 while the matching term is nonzero.
    """
    factor = f_y + params.sigma_y

    R = saturation(p_hat, params.Q, params.b)
    if params.Q > 0.0:
        factor = factor + R * R / (2.0 * params.Q)
    elif np.any(R * dp != 0.0):
        raise ParameterDomainError("Isotropic dissipation term undefined for Q = 0 with nonzero R")

    j_x = np.abs(x) * np.asarray(sigma_vm_sharp, dtype=np.float64) / (2.0 * params.mu)
    if params.C > 0.0:
        factor = factor + (params.D / (2.0 * params.C)) * j_x * j_x
    elif params.D > 0.0 and np.any(j_x * dp != 0.0):
        raise ParameterDomainError("Kinematic dissipation term undefined for C = 0 with nonzero back-stress")

    return factor


def dissipation(
    series: CorrectedSeries,
    params: MaterialParams,
    t_start_index: int = 0,
    t_end_index: int = -1,
):
    """
    Intrinsic dissipation over samples [t_start_index, t_end_index] (MPa = MJ/m^3).

    Rectangle rule with end-of-step values: sum of factor_i * (p_i - p_{i-1})
    over the steps ending inside the window.
    """
    n = series.n_times
    end = t_end_index if t_end_index >= 0 else n + t_end_index
    if not 0 <= t_start_index <= end < n:
        raise InputError(f"Invalid dissipation window [{t_start_index}, {t_end_index}] for {n} samples")

    window = slice(t_start_index + 1, end + 1)
    dp = np.diff(series.p_hat[t_start_index:end + 1], axis=0)
    factor = dissipation_factor(
        series.f_y[window], series.p_hat[window], series.x[window], series.sigma_vm_sharp, params, dp
    )
    result = np.sum(factor * dp, axis=0)
    return float(result) if np.ndim(result) == 0 else result


class QoIAccumulator:
    """
    Streaming QoI collector, used as an `integrate_points` observer.

    Keeps O(n_points) memory: final p_hat and |e_p|, p_hat extrema over the
    selected cycle, dissipation over the selected window and max J(sigma - X).
    """

    def __init__(
        self,
        sigma_vm_sharp: np.ndarray,
        params: MaterialParams,
        load: LoadHistory,
        cycle_index: int = -1,
        dissipation_window: Optional[Tuple[int, int]] = None,
        qois: Sequence[str] = QOI_NAMES,
    ):
        unknown = [q for q in qois if q not in QOI_NAMES]
        if unknown:
            raise InputError(f"Unknown QoI(s): {', '.join(unknown)} (known: {', '.join(QOI_NAMES)})")
        if not qois:
            raise InputError("QoI list is empty")

        self.qois = tuple(qois)
        self.sigma = np.asarray(sigma_vm_sharp, dtype=np.float64)
        self.params = params

        n_points = self.sigma.size
        self.cycle = cycle_window(load, cycle_index) if "delta_p" in self.qois else None
        last = len(load) - 1
        self.window = dissipation_window or (0, last)
        if not 0 <= self.window[0] <= self.window[1] <= last:
            raise InputError(f"Invalid dissipation window {self.window} for {len(load)} samples")

        self.p_final = np.zeros(n_points)
        self.e_p_final = np.zeros(n_points)
        self.p_min = np.full(n_points, np.inf)
        self.p_max = np.full(n_points, -np.inf)
        self.dissipated = np.zeros(n_points)
        self.j_max = np.zeros(n_points)
        self._p_prev: Optional[np.ndarray] = None

    def __call__(self, index: int, state: StateArrays) -> None:
        if self._p_prev is not None and self.window[0] < index <= self.window[1]:
            dp = state.p_hat - self._p_prev
            factor = dissipation_factor(state.f_y, state.p_hat, state.x, self.sigma, self.params, dp)
            self.dissipated += factor * dp

        if self.cycle is not None and self.cycle[0] <= index <= self.cycle[1]:
            np.minimum(self.p_min, state.p_hat, out=self.p_min)
            np.maximum(self.p_max, state.p_hat, out=self.p_max)

        j = np.abs(state.s - state.x / (2.0 * self.params.mu)) * self.sigma
        np.maximum(self.j_max, j, out=self.j_max)

        self.p_final = state.p_hat.copy()
        self.e_p_final = np.abs(state.e_p)
        self._p_prev = state.p_hat.copy()

    def results(self) -> Dict[str, np.ndarray]:
        values = {
            "p_final": self.p_final,
            "e_p_final": self.e_p_final,
            "delta_p": self.p_max - self.p_min if self.cycle is not None else None,
            "dissipation": self.dissipated,
            "j_max": self.j_max,
        }
        return {name: values[name] for name in self.qois}
