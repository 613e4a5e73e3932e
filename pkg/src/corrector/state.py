"""
State containers for the scalar plastic corrector.

Scalar variables (s, e, e_p, p_hat, x) follow the reduced system:
s, e and e_p are ratios to the elastic f=1 solution, p_hat is the
cumulative plastic strain and x the kinematic variable (MPa).
"""
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from src.errors import ParameterDomainError, PointFailure
from src.material.params import MaterialParams

STATE_FIELDS = ("s", "e", "e_p", "p_hat", "x", "s_o", "e_o", "e_p_o", "f_o")


@dataclass(frozen=True)
class SolverSettings:
    """Newton / bisection controls for the implicit step."""
    fy_tolerance: float = 1e-7              # MPa
    max_newton_iters: int = 50
    fd_step: float = 1e-8                   # h = max(fd_step, fd_step * |e_p|)
    bisection_fallback: bool = True
    max_bracket_doublings: int = 200
    max_bisection_iters: int = 200

    def __post_init__(self):
        if not self.fy_tolerance > 0.0:
            raise ParameterDomainError(f"fy_tolerance must be > 0, got {self.fy_tolerance}")
        if int(self.max_newton_iters) < 1:
            raise ParameterDomainError(f"max_newton_iters must be >= 1, got {self.max_newton_iters}")
        if not self.fd_step > 0.0:
            raise ParameterDomainError(f"fd_step must be > 0, got {self.fd_step}")

    @classmethod
    def for_material(cls, params: MaterialParams, relative_tolerance: float = 1e-9, **kwargs) -> "SolverSettings":
        """Default tolerance scaled to the yield stress (1e-9 * sigma_y)."""
        return cls(fy_tolerance=relative_tolerance * params.sigma_y, **kwargs)


@dataclass(frozen=True)
class Origins:
    """Neuber origins, reset to the current state at every load reversal."""
    s_o: Any = 0.0
    e_o: Any = 0.0
    e_p_o: Any = 0.0
    f_o: Any = 0.0


@dataclass(frozen=True)
class ScalarCorrectorState:
    """Converged state of one point at one time sample."""
    s: float = 0.0
    e: float = 0.0
    e_p: float = 0.0
    p_hat: float = 0.0
    x: float = 0.0
    s_o: float = 0.0
    e_o: float = 0.0
    e_p_o: float = 0.0
    f_o: float = 0.0


@dataclass
class StateArrays:
    """Vectorised state of many points at one time sample."""
    s: np.ndarray
    e: np.ndarray
    e_p: np.ndarray
    p_hat: np.ndarray
    x: np.ndarray
    s_o: np.ndarray
    e_o: np.ndarray
    e_p_o: np.ndarray
    f_o: np.ndarray
    f_y: np.ndarray
    f: float = 0.0
    failed: Optional[np.ndarray] = None

    @classmethod
    def virgin(cls, n_points: int) -> "StateArrays":
        zeros = [np.zeros(n_points) for _ in STATE_FIELDS]
        return cls(*zeros, f_y=np.zeros(n_points), f=0.0, failed=np.zeros(n_points, dtype=bool))

    @classmethod
    def from_state(cls, state: ScalarCorrectorState, f: float = 0.0) -> "StateArrays":
        values = [np.array([getattr(state, name)], dtype=np.float64) for name in STATE_FIELDS]
        return cls(*values, f_y=np.zeros(1), f=f, failed=np.zeros(1, dtype=bool))

    @property
    def n_points(self) -> int:
        return self.s.size

    def reanchor(self) -> "StateArrays":
        """Origins <- current state (applied at a reversal sample)."""
        return replace(
            self,
            s_o=self.s.copy(),
            e_o=self.e.copy(),
            e_p_o=self.e_p.copy(),
            f_o=np.full_like(self.s, self.f),
        )

    def point(self, j: int) -> ScalarCorrectorState:
        return ScalarCorrectorState(**{name: float(getattr(self, name)[j]) for name in STATE_FIELDS})


@dataclass
class CorrectedSeries:
    """
    Time series of the scalar corrector state.

    Arrays are shaped (n_times,) for one point or (n_times, n_points)
    for a batch; `sigma_vm_sharp` is a float or an (n_points,) array.
    """
    times: np.ndarray
    f: np.ndarray
    sigma_vm_sharp: Any
    s: np.ndarray
    e: np.ndarray
    e_p: np.ndarray
    p_hat: np.ndarray
    x: np.ndarray
    f_y: np.ndarray
    s_o: np.ndarray
    e_o: np.ndarray
    e_p_o: np.ndarray
    f_o: np.ndarray
    failures: List[PointFailure] = field(default_factory=list)
    point_ids: Optional[List[str]] = None   # failure ids of a batch (default: column indices)

    @property
    def n_times(self) -> int:
        return self.f.size

    @property
    def is_batch(self) -> bool:
        return self.s.ndim == 2

    def state(self, i: int, j: Optional[int] = None) -> ScalarCorrectorState:
        """State at time sample i (of point j for a batch)."""
        index = (i,) if j is None else (i, j)
        return ScalarCorrectorState(**{name: float(getattr(self, name)[index]) for name in STATE_FIELDS})

    def point(self, j: int) -> "CorrectedSeries":
        """One-point view of a batch series."""
        if not self.is_batch:
            return self
        point_id = self.point_ids[j] if self.point_ids is not None else str(j)
        columns = {f.name: getattr(self, f.name)[:, j] for f in fields(self)
                   if f.name in STATE_FIELDS or f.name == "f_y"}
        return CorrectedSeries(
            times=self.times,
            f=self.f,
            sigma_vm_sharp=float(np.asarray(self.sigma_vm_sharp)[j]),
            failures=[fl for fl in self.failures if fl.point_id == point_id],
            **columns,
        )

    def to_frame(self) -> pd.DataFrame:
        """One-point series as a table (t, f, state variables, f_y)."""
        if self.is_batch:
            raise ValueError("to_frame() needs a one-point series; use point(j) first")
        data: Dict[str, np.ndarray] = {"t": self.times, "f": self.f}
        for name in STATE_FIELDS:
            data[name] = getattr(self, name)
        data["f_y"] = self.f_y
        return pd.DataFrame(data)
