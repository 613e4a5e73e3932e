"""
Training data for the surrogate: QoIs of the direct corrector on a
log-uniform grid of elastic stresses, refined around the yield onset.
"""
from typing import Optional, Tuple

import numpy as np
from loguru import logger

from src.corrector.integrate import integrate_points
from src.corrector.load import LoadHistory
from src.corrector.state import SolverSettings
from src.errors import InputError
from src.material.params import MaterialParams
from src.qoi.metrics import QoIAccumulator
from src.surrogate.gp import DEFAULT_FLOOR

# Surrogate QoI name -> accumulator output
QOI_SELECTORS = {
    "e_p_final": "e_p_final",
    "p_final": "p_final",
    "delta_p": "delta_p",
    "dissipation": "dissipation",
}

LOWER_INPUT_RATIO = 1e-3

# Extra samples at onset * (1 + r), r log-uniform on ONSET_SPAN
ONSET_SAMPLES = 16
ONSET_SPAN = (1e-5, 1e-1)
# Bracket width relative to its upper end at which the onset search stops
ONSET_RTOL = 1e-12
_BRACKET_POINTS = 16


def evaluate_qoi(
    sigma_vm_sharp,
    load: LoadHistory,
    params: MaterialParams,
    qoi: str,
    settings: Optional[SolverSettings] = None,
) -> np.ndarray:
    """Direct corrector value of a surrogate QoI for each stress (streamed, no history kept)."""
    if qoi not in QOI_SELECTORS:
        raise InputError(f"Unknown QoI selector '{qoi}' (known: {', '.join(QOI_SELECTORS)})")
    sigma = np.atleast_1d(np.asarray(sigma_vm_sharp, dtype=np.float64))
    accumulator = QoIAccumulator(sigma, params, load, qois=(QOI_SELECTORS[qoi],))
    integrate_points(sigma, load, params, settings, observer=accumulator)
    return accumulator.results()[QOI_SELECTORS[qoi]]


def training_inputs(params: MaterialParams, n_s: int, s_plus: float) -> np.ndarray:
    """n_s stresses log-uniform on [1e-3 sigma_y, s_plus sigma_y]."""
    if n_s < 2:
        raise InputError(f"n_s must be >= 2, got {n_s}")
    if not s_plus > LOWER_INPUT_RATIO:
        raise InputError(f"s_plus must be > {LOWER_INPUT_RATIO}, got {s_plus}")
    return np.geomspace(LOWER_INPUT_RATIO * params.sigma_y, s_plus * params.sigma_y, n_s)


def locate_onset(
    params: MaterialParams,
    load: LoadHistory,
    qoi: str,
    lower: float,
    upper: float,
    floor_value: float = DEFAULT_FLOOR,
    settings: Optional[SolverSettings] = None,
) -> Tuple[float, float]:
    """
    Shrink a bracket around the smallest stress whose QoI exceeds floor_value.

    Each pass evaluates 16 interior stresses in one batch and keeps the
    sub-interval where the QoI first becomes active.

    Args:
        lower: Stress with a floored QoI
        upper: Stress with an active QoI (> lower)

    Returns:
        (lo, hi): lo floored, hi active, hi - lo <= ONSET_RTOL * hi
    """
    lo, hi = float(lower), float(upper)
    if not hi > lo:
        raise InputError(f"Onset bracket needs lower < upper, got [{lo}, {hi}]")
    while hi - lo > ONSET_RTOL * hi:
        trial = np.linspace(lo, hi, _BRACKET_POINTS + 2)[1:-1]
        active = np.flatnonzero(evaluate_qoi(trial, load, params, qoi, settings) > floor_value)
        if active.size:
            k = int(active[0])
            hi = float(trial[k])
            if k:
                lo = float(trial[k - 1])
        else:
            lo = float(trial[-1])
    return lo, hi


def build_training_set(
    params: MaterialParams,
    load: LoadHistory,
    n_s: int,
    s_plus: float,
    qoi_selector: str = "e_p_final",
    settings: Optional[SolverSettings] = None,
    floor_value: float = DEFAULT_FLOOR,
    onset_samples: int = ONSET_SAMPLES,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Inputs and raw (unfloored) QoI targets for surrogate training.

    When the grid crosses the yield onset, the onset is bracketed with the
    direct corrector and the set gains the floored lower bracket end plus
    `onset_samples` stresses just above it (0 keeps the plain grid).

    Raises:
        InputError: On n_s < 2, s_plus out of range or an unknown selector.
    """
    inputs = training_inputs(params, n_s, s_plus)
    targets = evaluate_qoi(inputs, load, params, qoi_selector, settings)

    active = targets > floor_value
    if onset_samples > 0 and active.any() and not active[0]:
        first = int(np.argmax(active))
        lo, hi = locate_onset(params, load, qoi_selector, inputs[first - 1], inputs[first], floor_value, settings)
        extra = np.concatenate(([lo], lo * (1.0 + np.geomspace(*ONSET_SPAN, onset_samples))))
        extra = np.setdiff1d(extra, inputs)
        inputs = np.concatenate((inputs, extra))
        targets = np.concatenate((targets, evaluate_qoi(extra, load, params, qoi_selector, settings)))
        order = np.argsort(inputs)
        inputs, targets = inputs[order], targets[order]
        logger.info(f"Yield onset of {qoi_selector} in [{lo:.12g}, {hi:.12g}] MPa, {extra.size} samples added")

    logger.info(f"Training set: {inputs.size} samples up to {inputs[-1]:g} MPa, "
                f"{int(np.count_nonzero(targets > floor_value))} with nonzero {qoi_selector}")
    return inputs, targets
