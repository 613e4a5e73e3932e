"""
Elastic input of one quadrature point: the f=1 elastic stress state.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.errors import CapabilityError, InputError, ValidationError
from src.material.tensors import as_sym, deviatoric, frobenius_norm, trace, von_mises

# Relative tolerances applied to exported (rounded) tensor columns
SVM_MATCH_TOLERANCE = 1e-6
DEVIATOR_TRACE_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class ElasticPointRecord:
    """
    One row of an elastic field.

    `dev_sigma_sharp` is the deviator of the f=1 elastic stress (six
    components, MPa) and `trace_sigma_sharp` its trace. Both are optional;
    a scalar-only record carries `sigma_vm_sharp` alone.
    """
    id: str
    sigma_vm_sharp: float
    dev_sigma_sharp: Optional[np.ndarray] = None
    trace_sigma_sharp: Optional[float] = None

    def __post_init__(self):
        svm = float(self.sigma_vm_sharp)
        if not (math.isfinite(svm) and svm >= 0.0):
            raise InputError(f"Point {self.id}: sigma_vm_sharp must be finite and >= 0, got {svm}")
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "sigma_vm_sharp", svm)

        if self.trace_sigma_sharp is not None:
            object.__setattr__(self, "trace_sigma_sharp", float(self.trace_sigma_sharp))

        if self.dev_sigma_sharp is None:
            return

        dev = np.array(as_sym(self.dev_sigma_sharp), dtype=np.float64)
        if dev.ndim != 1 or not np.all(np.isfinite(dev)):
            raise InputError(f"Point {self.id}: deviator must be six finite components")
        norm = float(frobenius_norm(dev))
        if abs(float(trace(dev))) > DEVIATOR_TRACE_TOLERANCE * max(norm, 1.0):
            raise ValidationError("Deviatoric stress columns have a non-zero trace", [self.id])

        # Remove the rounding residue of the export so the stored deviator is exact
        dev = deviatoric(dev)
        svm_tensor = float(von_mises(dev))
        if abs(svm_tensor - svm) > SVM_MATCH_TOLERANCE * max(svm_tensor, svm):
            raise ValidationError(
                f"svm={svm} disagrees with the deviator (von Mises {svm_tensor})", [self.id]
            )
        dev.setflags(write=False)
        object.__setattr__(self, "dev_sigma_sharp", dev)

    @classmethod
    def from_deviator(cls, id: str, dev_sigma_sharp, trace_sigma_sharp: Optional[float] = None) -> "ElasticPointRecord":
        """Record whose sigma_vm_sharp is derived from the deviator."""
        dev = deviatoric(as_sym(dev_sigma_sharp))
        return cls(id, float(von_mises(dev)), dev, trace_sigma_sharp)

    @property
    def has_tensors(self) -> bool:
        return self.dev_sigma_sharp is not None

    def require_tensors(self, what: str) -> None:
        if self.dev_sigma_sharp is None:
            raise CapabilityError(f"Point {self.id} is scalar-only; {what} needs the deviatoric tensor")
