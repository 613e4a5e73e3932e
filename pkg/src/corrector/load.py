"""
Proportional load histories f(t) and their reversal structure.
"""
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger

from src.errors import InputError


def detect_reversals(load: Union["LoadHistory", Sequence[float], np.ndarray]) -> np.ndarray:
    """
    Find the samples where the monotonic direction of f flips.

    Zero-length segments (plateaus) carry the previous direction, so a
    plateau at a peak reports its last sample.

    Args:
        load: LoadHistory or raw sequence of f values

    Returns:
        Sorted int array of interior reversal indices (empty for monotone loads)

    Raises:
        InputError: If fewer than 2 samples are given.
    """
    values = load.values if isinstance(load, LoadHistory) else np.asarray(load, dtype=np.float64)
    if values.ndim != 1 or values.size < 2:
        raise InputError(f"Load history needs at least 2 samples, got {values.size}")

    steps = np.sign(np.diff(values))
    moving = np.flatnonzero(steps)
    if moving.size < 2:
        return np.empty(0, dtype=np.int64)

    directions = steps[moving]
    flips = np.flatnonzero(directions[1:] != directions[:-1])
    # Segment k spans samples k..k+1; the flip sample is where the new segment starts
    return moving[flips + 1].astype(np.int64)


@dataclass(frozen=True, eq=False)
class LoadHistory:
    """Sampled load function: times [s] (strictly increasing) and f(t_i)."""
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64).ravel()
        values = np.array(self.values, dtype=np.float64).ravel()

        if times.size != values.size:
            raise InputError(f"times ({times.size}) and values ({values.size}) differ in length")
        if times.size < 2:
            raise InputError(f"Load history needs at least 2 samples, got {times.size}")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise InputError("Load history contains non-finite values")
        bad = np.flatnonzero(np.diff(times) <= 0.0)
        if bad.size:
            raise InputError(f"Load times must be strictly increasing (first violation at sample {bad[0] + 1})")

        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @cached_property
    def reversal_indices(self) -> np.ndarray:
        return detect_reversals(self.values)

    @property
    def peak(self) -> float:
        """Largest |f| over the history."""
        return float(np.max(np.abs(self.values)))

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "LoadHistory":
        """
        Read a `t,f` CSV (header mandatory).

        Raises:
            FileNotFoundError: If the file is missing.
            InputError: If columns are missing or values are malformed.
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Load history not found: {path}")

        try:
            df = pd.read_csv(path, encoding="utf-8", float_precision="round_trip")
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise InputError(f"Cannot parse load history {path}: {e}") from e

        df.columns = [str(c).strip() for c in df.columns]
        missing = [c for c in ("t", "f") if c not in df.columns]
        if missing:
            raise InputError(f"Load history {path} lacks column(s): {', '.join(missing)}")

        numeric = df[["t", "f"]].apply(pd.to_numeric, errors="coerce")
        bad_rows = numeric.index[numeric.isna().any(axis=1)]
        if len(bad_rows):
            # +2: header line and 1-based numbering
            lines = ", ".join(str(i + 2) for i in bad_rows[:10])
            raise InputError(f"Malformed load history rows in {path} at line(s) {lines}")

        load = cls(numeric["t"].to_numpy(), numeric["f"].to_numpy())
        logger.debug(f"Load history {path}: {len(load)} samples, {load.reversal_indices.size} reversals")
        return load

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "f": self.values})


def ramp_load(peak: float, n_steps: int, duration: float = 1.0) -> LoadHistory:
    """Monotone ramp from 0 to `peak` in `n_steps` equal increments."""
    if n_steps < 1:
        raise InputError(f"n_steps must be >= 1, got {n_steps}")
    times = np.linspace(0.0, duration, n_steps + 1)
    values = np.linspace(0.0, peak, n_steps + 1)
    return LoadHistory(times, values)


def triangle_load(
    amplitude: float,
    n_cycles: int,
    steps_per_quarter: int,
    period: float = 1.0,
    mean: float = 0.0,
) -> LoadHistory:
    """
    Symmetric triangle wave mean -> mean+A -> mean-A -> mean, repeated.

    Peaks fall exactly on samples, so n cycles give 2n interior reversals.
    """
    if n_cycles < 1 or steps_per_quarter < 1:
        raise InputError("n_cycles and steps_per_quarter must be >= 1")

    n_quarters = 4 * n_cycles
    keys = mean + amplitude * np.tile([0.0, 1.0, 0.0, -1.0], n_cycles + 1)[: n_quarters + 1]

    index = np.arange(n_quarters * steps_per_quarter + 1)
    # The last sample stays in the last quarter with offset == steps_per_quarter
    quarter = np.minimum(index // steps_per_quarter, n_quarters - 1)
    offset = index - quarter * steps_per_quarter
    values = keys[quarter] + (keys[quarter + 1] - keys[quarter]) * (offset / steps_per_quarter)

    times = index * (period / (4.0 * steps_per_quarter))
    return LoadHistory(times, values)


def refine(load: LoadHistory, refinement: int) -> LoadHistory:
    """
    Linear resampling with `refinement` substeps per segment.
    Original sample i becomes sample i * refinement (values exact).
    """
    if refinement < 1:
        raise InputError(f"refinement must be >= 1, got {refinement}")
    if refinement == 1:
        return load

    fractions = np.arange(refinement) / refinement
    t, f = load.times, load.values
    times = (t[:-1, None] + np.diff(t)[:, None] * fractions).ravel()
    values = (f[:-1, None] + np.diff(f)[:, None] * fractions).ravel()
    return LoadHistory(np.append(times, t[-1]), np.append(values, f[-1]))
