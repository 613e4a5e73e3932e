"""
One-dimensional Gaussian-process surrogate: sigma_vm_sharp -> QoI at a fixed load.

Zero targets are replaced by a small floor value; the largest floored input
below the first active one marks the yield onset, at or below which
predictions are exactly zero. Above it the GP (squared-exponential kernel,
constant mean) maps z = log(sigma - onset) to y = log(QoI) - z, which stays
bounded as the QoI leaves zero. Below the smallest fitted z, y is held at
its value there (QoI linear in sigma - onset).
"""
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from loguru import logger
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.optimize import minimize

from src.errors import InputError, TrainingError

FORMAT_VERSION = 2
DEFAULT_FLOOR = 1e-12
INITIAL_JITTER = 1e-10
MAX_JITTER = 1e-4
DEFAULT_RESTARTS = 5
PREDICT_CHUNK = 100_000
# Log-space margin above log(floor_value) below which predictions are zero
FLOOR_LOG_TOLERANCE = 1e-9

# Penalty returned by the likelihood when a factorization fails
_FAILED_NLML = 1e25


def _se_kernel(a: np.ndarray, b: np.ndarray, length_scale: float, signal_variance: float) -> np.ndarray:
    d = a[:, None] - b[None, :]
    return signal_variance * np.exp(-0.5 * (d / length_scale) ** 2)


def _factorize(z: np.ndarray, length_scale: float, signal_variance: float, jitter: float = INITIAL_JITTER):
    """Cholesky of K + jitter*sf2*I, escalating jitter x10 up to MAX_JITTER."""
    K = _se_kernel(z, z, length_scale, signal_variance)
    diag = np.arange(z.size)
    while True:
        Kn = K.copy()
        Kn[diag, diag] += jitter * signal_variance
        try:
            return cho_factor(Kn, lower=True, check_finite=True), jitter
        except (LinAlgError, ValueError):
            if jitter * 10.0 > MAX_JITTER * (1.0 + 1e-9):
                raise TrainingError(
                    f"Covariance not positive definite at jitter {jitter:.0e} (length scale {length_scale:.3e})"
                )
            jitter *= 10.0


def _neg_log_likelihood(theta: np.ndarray, z: np.ndarray, y: np.ndarray) -> float:
    length_scale, signal_variance = np.exp(theta)
    try:
        factor, _ = _factorize(z, length_scale, signal_variance)
    except TrainingError:
        return _FAILED_NLML
    alpha = cho_solve(factor, y)
    value = 0.5 * y @ alpha + np.sum(np.log(np.diag(factor[0]))) + 0.5 * y.size * np.log(2.0 * np.pi)
    return float(value) if np.isfinite(value) else _FAILED_NLML


@dataclass
class SurrogateModel:
    """Trained GP surrogate; `predict` is read-only and safe to share."""
    inputs: np.ndarray                # sigma_vm_sharp samples [MPa]
    targets: np.ndarray               # QoI samples after flooring
    length_scale: float
    signal_variance: float
    jitter: float
    mean: float
    floor_value: float = DEFAULT_FLOOR
    onset_input: float = 0.0
    upper_limit: float = np.inf       # inputs above this are extrapolation
    qoi: str = "e_p_final"
    _factor: Any = field(default=None, repr=False)
    _alpha: Optional[np.ndarray] = field(default=None, repr=False)
    _fit_z: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def noise_variance(self) -> float:
        return self.jitter * self.signal_variance

    @property
    def active(self) -> np.ndarray:
        return self.targets > self.floor_value

    def _fit_data(self) -> Tuple[np.ndarray, np.ndarray]:
        """Shifted log inputs z and ratios y = log(QoI) - z of the active samples."""
        mask = self.active
        z = np.log(self.inputs[mask] - self.onset_input)
        return z, np.log(self.targets[mask]) - z

    def _prepare(self) -> None:
        z, y = self._fit_data()
        if z.size == 0:
            self._factor, self._alpha, self._fit_z = None, np.empty(0), z
            return
        self._factor, self.jitter = _factorize(z, self.length_scale, self.signal_variance, self.jitter)
        self._alpha = cho_solve(self._factor, y - self.mean)
        self._fit_z = z

    def predict_log(self, sigma_vm_sharp: np.ndarray) -> np.ndarray:
        """Posterior log(QoI) at inputs above the onset."""
        if self._alpha is None:
            self._prepare()
        z = np.log(np.asarray(sigma_vm_sharp, dtype=np.float64) - self.onset_input)
        z_kernel = np.maximum(z, self._fit_z.min())
        return self.mean + _se_kernel(z_kernel, self._fit_z, self.length_scale, self.signal_variance) @ self._alpha + z

    def predict(
        self,
        sigma_vm_sharp,
        chunk_size: int = PREDICT_CHUNK,
        return_extrapolation: bool = False,
    ) -> Union[np.ndarray, Tuple[np.ndarray, np.ndarray]]:
        """
        QoI predictions: exp of the posterior log value, zero at or below the
        floor and at or below the yield onset.

        Args:
            sigma_vm_sharp: Elastic von Mises stresses
            chunk_size: Inputs per kernel evaluation block
            return_extrapolation: Also return the mask of out-of-range inputs

        Returns:
            Predictions (and the extrapolation mask)
        """
        values = np.atleast_1d(np.asarray(sigma_vm_sharp, dtype=np.float64)).ravel()
        if not np.all(np.isfinite(values)):
            raise InputError("Surrogate inputs must be finite")

        out = np.zeros(values.size)
        if self.active.any():
            log_floor = np.log(self.floor_value) + FLOOR_LOG_TOLERANCE
            live = np.flatnonzero(values > self.onset_input)
            for start in range(0, live.size, chunk_size):
                idx = live[start:start + chunk_size]
                log_pred = self.predict_log(values[idx])
                out[idx] = np.where(log_pred > log_floor, np.exp(log_pred), 0.0)

        outside = (values <= 0.0) | (values > self.upper_limit)
        if outside.any():
            logger.warning(
                f"{int(outside.sum())} surrogate input(s) outside (0, {self.upper_limit:g}] MPa "
                f"(extrapolated), e.g. {values[outside][0]:g}"
            )
        return (out, outside) if return_extrapolation else out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "qoi": self.qoi,
            "inputs": self.inputs.tolist(),
            "targets": self.targets.tolist(),
            "length_scale": self.length_scale,
            "signal_variance": self.signal_variance,
            "jitter": self.jitter,
            "mean": self.mean,
            "floor_value": self.floor_value,
            "onset_input": self.onset_input,
            "upper_limit": None if np.isinf(self.upper_limit) else self.upper_limit,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SurrogateModel":
        version = data.get("format_version")
        if version != FORMAT_VERSION:
            raise InputError(f"Unsupported surrogate format_version {version} (expected {FORMAT_VERSION})")
        try:
            model = cls(
                inputs=np.asarray(data["inputs"], dtype=np.float64),
                targets=np.asarray(data["targets"], dtype=np.float64),
                length_scale=float(data["length_scale"]),
                signal_variance=float(data["signal_variance"]),
                jitter=float(data["jitter"]),
                mean=float(data["mean"]),
                floor_value=float(data["floor_value"]),
                onset_input=float(data["onset_input"]),
                upper_limit=np.inf if data.get("upper_limit") is None else float(data["upper_limit"]),
                qoi=str(data["qoi"]),
            )
        except KeyError as e:
            raise InputError(f"Surrogate file lacks field {e}") from e
        model._prepare()
        return model


def _onset(inputs: np.ndarray, active: np.ndarray) -> float:
    """Largest floored input below the smallest active one (0 if none)."""
    if not active.any():
        return float(inputs.max())
    below = inputs[~active & (inputs < inputs[active].min())]
    return float(below.max()) if below.size else 0.0


def train(
    inputs,
    targets,
    floor_value: float = DEFAULT_FLOOR,
    qoi: str = "e_p_final",
    upper_limit: float = np.inf,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
) -> SurrogateModel:
    """
    Fit the surrogate by maximising the log marginal likelihood (L-BFGS-B).

    The optimiser starts from (input span, target variance) and from
    `restarts` points drawn with a seeded generator, so training is deterministic.

    Raises:
        InputError: Fewer than 2 samples, non-positive or duplicate inputs, bad targets.
        TrainingError: Covariance not factorizable at maximum jitter.
    """
    x = np.asarray(inputs, dtype=np.float64).ravel()
    t = np.asarray(targets, dtype=np.float64).ravel()
    if x.size < 2 or x.size != t.size:
        raise InputError(f"Need >= 2 matching inputs/targets, got {x.size}/{t.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(t))):
        raise InputError("Training data must be finite")
    if np.any(x <= 0.0):
        raise InputError("Training inputs must be > 0 (log transform)")
    if np.unique(x).size != x.size:
        raise InputError("Training inputs must be distinct")
    if np.any(t < 0.0):
        raise InputError("Training targets must be >= 0")
    if not floor_value > 0.0:
        raise InputError(f"floor_value must be > 0, got {floor_value}")

    order = np.argsort(x)
    x, t = x[order], np.maximum(t[order], floor_value)
    active = t > floor_value

    onset = _onset(x, active)
    if not active.any():
        length_scale, signal_variance, mean = 1.0, 1.0, 0.0
    else:
        z = np.log(x[active] - onset)
        ratio = np.log(t[active]) - z
        mean = float(ratio.mean())
        y = ratio - mean

        span = max(float(z.max() - z.min()), 1e-6)
        variance = float(y.var())
        if variance == 0.0:
            # Constant ratios: any length scale interpolates
            length_scale, signal_variance = span, 1.0
        else:
            bounds = [(np.log(span / 1000.0), np.log(span * 10.0)),
                      (np.log(variance * 1e-4), np.log(variance * 1e4))]
            rng = np.random.default_rng(seed)
            starts = [np.array([np.log(span / 3.0), np.log(variance)])]
            starts += [np.array([rng.uniform(*bounds[0]), rng.uniform(*bounds[1])]) for _ in range(restarts)]

            best = None
            for theta0 in starts:
                result = minimize(_neg_log_likelihood, theta0, args=(z, y), method="L-BFGS-B", bounds=bounds)
                if best is None or result.fun < best.fun:
                    best = result
            length_scale, signal_variance = (float(v) for v in np.exp(best.x))
            logger.debug(f"GP hyperparameters: length_scale={length_scale:.4e}, "
                         f"signal_variance={signal_variance:.4e}, nlml={best.fun:.4e}")

    model = SurrogateModel(
        inputs=x,
        targets=t,
        length_scale=length_scale,
        signal_variance=signal_variance,
        jitter=INITIAL_JITTER,
        mean=mean,
        floor_value=floor_value,
        onset_input=onset,
        upper_limit=upper_limit,
        qoi=qoi,
    )
    model._prepare()
    if model.jitter > INITIAL_JITTER:
        logger.warning(f"GP jitter escalated to {model.jitter:.0e} of the signal variance")
    logger.info(f"Surrogate trained: {x.size} samples ({int(active.sum())} active), onset {model.onset_input:g} MPa")
    return model


def save_model(model: SurrogateModel, path: Union[str, Path]) -> None:
    """Write a model as versioned JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model.to_dict(), indent=2), encoding="utf-8")
    logger.info(f"Surrogate saved to {path}")


def load_model(path: Union[str, Path]) -> SurrogateModel:
    """Read a model written by save_model and refactorize its covariance."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Surrogate model not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InputError(f"Cannot parse surrogate model {path}: {e}") from e
    return SurrogateModel.from_dict(data)


def predict(model: SurrogateModel, sigma_vm_values, return_extrapolation: bool = False):
    """Module-level alias of SurrogateModel.predict."""
    return model.predict(sigma_vm_values, return_extrapolation=return_extrapolation)
