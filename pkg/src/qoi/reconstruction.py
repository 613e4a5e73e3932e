"""
Tensor fields rebuilt from the scalar corrector output.

Every deviatoric tensor of the approximated elasto-plastic state is the
scalar variable times the elastic f=1 direction:
    sigma_d = s * dev_sharp, eps_d = e * eps_sharp, eps_p = e_p * eps_sharp,
    X = x * eps_sharp, with eps_sharp = dev_sharp / (2 mu).
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.corrector.load import LoadHistory
from src.corrector.state import CorrectedSeries
from src.errors import CapabilityError, InputError
from src.material.params import MaterialParams
from src.material.tensors import IDENTITY
from src.qoi.records import ElasticPointRecord


@dataclass
class ReconstructedTensors:
    """Six-component tensor series, each shaped (n_times, 6)."""
    stress: np.ndarray
    strain_dev: np.ndarray
    plastic_strain_dev: np.ndarray
    back_stress: np.ndarray

    @property
    def stress_dev(self) -> np.ndarray:
        hydrostatic = (self.stress[:, 0] + self.stress[:, 1] + self.stress[:, 2]) / 3.0
        return self.stress - hydrostatic[:, None] * IDENTITY


def _one_point(series: CorrectedSeries) -> CorrectedSeries:
    if series.is_batch:
        raise InputError("Tensor reconstruction works on a one-point series; use series.point(j)")
    return series


def _load_values(series: CorrectedSeries, load: Optional[LoadHistory]) -> np.ndarray:
    if load is None:
        return series.f
    if len(load) != series.n_times:
        raise InputError(f"Load history has {len(load)} samples, series has {series.n_times}")
    return load.values


def reconstruct_stress(
    series: CorrectedSeries,
    record: ElasticPointRecord,
    load: Optional[LoadHistory] = None,
) -> np.ndarray:
    """
    Approximated stress tensor history sigma(t) = s(t) dev_sharp + f(t) tr_sharp / 3 I.

    Args:
        series: One-point corrected series
        record: Elastic record with deviator and trace
        load: Load history of the series (defaults to the f stored in the series)

    Returns:
        (n_times, 6) array

    Raises:
        CapabilityError: If the record is scalar-only or lacks the trace.
    """
    series = _one_point(series)
    record.require_tensors("stress reconstruction")
    if record.trace_sigma_sharp is None:
        raise CapabilityError(f"Point {record.id} has no trace column; hydrostatic stress is unknown")

    f = _load_values(series, load)
    return (
        series.s[:, None] * record.dev_sigma_sharp
        + (f * record.trace_sigma_sharp / 3.0)[:, None] * IDENTITY
    )


def reconstruct_tensors(
    series: CorrectedSeries,
    record: ElasticPointRecord,
    params: MaterialParams,
    load: Optional[LoadHistory] = None,
) -> ReconstructedTensors:
    """Stress, deviatoric strain, plastic strain and back-stress histories of one point."""
    series = _one_point(series)
    stress = reconstruct_stress(series, record, load)
    eps_sharp = record.dev_sigma_sharp / (2.0 * params.mu)
    return ReconstructedTensors(
        stress=stress,
        strain_dev=series.e[:, None] * eps_sharp,
        plastic_strain_dev=series.e_p[:, None] * eps_sharp,
        back_stress=series.x[:, None] * eps_sharp,
    )


def equivalent_stress(
    series: CorrectedSeries,
    params: MaterialParams,
    sigma_vm_sharp=None,
) -> np.ndarray:
    """
    Approximated von Mises stress J(sigma - X) = |s - x/(2 mu)| sigma_vm_sharp.

    Works on one-point and batch series; shape follows series.s.
    """
    sigma = series.sigma_vm_sharp if sigma_vm_sharp is None else sigma_vm_sharp
    return np.abs(series.s - series.x / (2.0 * params.mu)) * np.asarray(sigma, dtype=np.float64)
