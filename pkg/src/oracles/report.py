"""
Verification grid: scalar corrector against the tensorial oracle.
"""
from typing import Dict, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from src.corrector.integrate import integrate_points
from src.corrector.load import LoadHistory, ramp_load, triangle_load
from src.corrector.state import CorrectedSeries, SolverSettings
from src.material.params import MaterialParams
from src.oracles.tensorial import integrate_tensorial, synthetic_record
from src.qoi.metrics import cycle_windows, dissipation

DEFAULT_STRESS_FACTORS = (0.5, 1.0, 1.5, 2.0, 4.0, 8.0, 12.0)

COMPARED_VARIABLES = ("s", "e", "e_p", "p_hat", "x")


def default_loads() -> Dict[str, LoadHistory]:
    """Monotone 1.55 ramp, 2-cycle and 20-cycle unit triangle waves."""
    return {
        "ramp_1.55": ramp_load(1.55, 1000),
        "cycles_2": triangle_load(1.0, 2, 50),
        "cycles_20": triangle_load(1.0, 20, 50),
    }


def max_relative_difference(a: np.ndarray, b: np.ndarray) -> float:
    """max|a - b| / max|b| over a series (absolute when b is identically zero)."""
    scale = float(np.max(np.abs(b)))
    diff = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
    return diff / scale if scale > 0.0 else diff


def neuber_residual(series: CorrectedSeries) -> float:
    """max |(s - s_o)(e - e_o) - (f - f_o)^2| / max(1, f^2) over the series."""
    f = series.f if series.s.ndim == 1 else series.f[:, None]
    lhs = (series.s - series.s_o) * (series.e - series.e_o)
    rhs = (f - series.f_o) ** 2
    return float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, f * f)))


def verify_grid(
    params: MaterialParams,
    settings: Optional[SolverSettings] = None,
    stress_factors: Sequence[float] = DEFAULT_STRESS_FACTORS,
    loads: Optional[Mapping[str, LoadHistory]] = None,
) -> pd.DataFrame:
    """
    Run every (stress factor, load) case through both formulations.

    Returns:
        One row per case: max relative differences per scalar variable,
        Neuber residual, max f_y / sigma_y and min cycle dissipation.
    """
    settings = settings or SolverSettings.for_material(params)
    loads = loads or default_loads()
    rows = []

    factors = [float(k) for k in stress_factors]
    for load_name, load in loads.items():
        windows = cycle_windows(load) or [(0, len(load) - 1)]
        sigmas = [k * params.sigma_y for k in factors]
        batch = integrate_points(sigmas, load, params, settings) if sigmas else None
        for j, (factor, sigma) in enumerate(zip(factors, sigmas)):
            series = batch.point(j)
            projection = integrate_tensorial(synthetic_record(sigma), load, params).scalar_projection(params.mu)

            row = {"load": load_name, "stress_factor": factor, "sigma_vm_sharp": sigma}
            for name in COMPARED_VARIABLES:
                row[f"max_rel_{name}"] = max_relative_difference(getattr(series, name), projection[name])
            row["neuber_residual"] = neuber_residual(series)
            row["max_fy_ratio"] = float(np.max(series.f_y)) / params.sigma_y
            row["min_dissipation"] = min(dissipation(series, params, a, b) for a, b in windows)
            row["failures"] = len(series.failures)
            rows.append(row)
            logger.debug(f"verify {load_name} x{factor}: max_rel_p_hat={row['max_rel_p_hat']:.3e}")

    report = pd.DataFrame(rows)
    worst = report[[f"max_rel_{n}" for n in COMPARED_VARIABLES]].to_numpy().max() if rows else 0.0
    logger.info(f"Verification grid: {len(rows)} case(s), worst scalar/tensorial difference {worst:.3e}")
    return report
