from src.corrector.load import LoadHistory, detect_reversals, ramp_load, refine, triangle_load
from src.corrector.state import CorrectedSeries, Origins, ScalarCorrectorState, SolverSettings, StateArrays
from src.corrector.stepper import advance, step, trial_stress_ratio, yield_function
from src.corrector.integrate import integrate_point, integrate_points, iter_states

__all__ = [
    "LoadHistory",
    "detect_reversals",
    "ramp_load",
    "refine",
    "triangle_load",
    "CorrectedSeries",
    "Origins",
    "ScalarCorrectorState",
    "SolverSettings",
    "StateArrays",
    "advance",
    "step",
    "trial_stress_ratio",
    "yield_function",
    "integrate_point",
    "integrate_points",
    "iter_states",
]
