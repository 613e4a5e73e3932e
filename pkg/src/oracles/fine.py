"""
Brute-force convergence oracle: the scalar corrector on a refined load history.
"""
from typing import Optional

import numpy as np

from src.corrector.integrate import integrate_points
from src.corrector.load import LoadHistory, refine
from src.corrector.state import STATE_FIELDS, CorrectedSeries, SolverSettings
from src.errors import InputError
from src.material.params import MaterialParams


def integrate_fine(
    sigma_vm_sharp,
    load: LoadHistory,
    params: MaterialParams,
    refinement: int,
    settings: Optional[SolverSettings] = None,
) -> CorrectedSeries:
    """
    Integrate with `refinement` substeps per load segment.

    Returns the series on the refined samples; original sample i is row
    i * refinement (see `coarse_view`). A scalar input gives a one-point series.
    """
    if refinement < 1:
        raise InputError(f"refinement must be >= 1, got {refinement}")
    series = integrate_points(np.atleast_1d(sigma_vm_sharp), refine(load, refinement), params, settings)
    return series if np.ndim(sigma_vm_sharp) else series.point(0)


def coarse_view(series: CorrectedSeries, refinement: int) -> CorrectedSeries:
    """Rows of a refined series that coincide with the original samples."""
    rows = slice(None, None, refinement)
    arrays = {name: getattr(series, name)[rows] for name in STATE_FIELDS + ("f_y",)}
    return CorrectedSeries(
        times=series.times[rows],
        f=series.f[rows],
        sigma_vm_sharp=series.sigma_vm_sharp,
        failures=list(series.failures),
        point_ids=series.point_ids,
        **arrays,
    )
