"""
Paired comparison of one QoI between two field runs (plot-ready CSV).
"""
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from src.errors import InputError, ValidationError
from src.pipeline.field_io import FLOAT_FORMAT

DEFAULT_BAND = 0.20

PathLike = Union[str, Path]


def _read_qoi(path: PathLike, qoi: str) -> pd.Series:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"QoI file not found: {path}")
    df = pd.read_csv(path, dtype={"id": str}, encoding="utf-8", comment="#", float_precision="round_trip")
    df.columns = [str(c).strip() for c in df.columns]
    if "id" not in df.columns or qoi not in df.columns:
        raise InputError(f"{path} needs columns 'id' and '{qoi}'")
    values = pd.to_numeric(df[qoi], errors="coerce")
    if values.isna().any():
        raise InputError(f"Non-numeric {qoi} values in {path}")
    return pd.Series(values.to_numpy(dtype=np.float64), index=df["id"].str.strip(), name=qoi)


def relative_difference(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a - b)/|b|; 0 where both are 0, inf where only b is 0."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = (a - b) / np.abs(b)
    rel[(a == b)] = 0.0
    return rel


def emit_scatter(
    series_a_path: PathLike,
    series_b_path: PathLike,
    qoi: str,
    output_path: Optional[PathLike] = None,
    band: float = DEFAULT_BAND,
) -> Tuple[pd.DataFrame, float]:
    """
    Pair a QoI between two qoi.csv files by id (order of file A).

    Args:
        series_a_path: QoI CSV of run A
        series_b_path: QoI CSV of run B (reference for the relative difference)
        qoi: Column to compare
        output_path: Where to write the paired CSV (with a trailing summary comment)
        band: Half-width of the relative band reported in the summary

    Returns:
        (rows id,a,b,relative_difference; percentage of points within +-band)

    Raises:
        ValidationError: If the id sets differ (lists the missing ids).
    """
    a = _read_qoi(series_a_path, qoi)
    b = _read_qoi(series_b_path, qoi)

    missing = sorted(set(a.index) ^ set(b.index))
    if missing:
        raise ValidationError(f"Id sets of {series_a_path} and {series_b_path} differ", missing)

    b = b.reindex(a.index)
    rel = relative_difference(a.to_numpy(), b.to_numpy())
    frame = pd.DataFrame({"id": a.index, "a": a.to_numpy(), "b": b.to_numpy(), "relative_difference": rel})
    within = 100.0 * float(np.mean(np.abs(rel) <= band)) if len(frame) else 100.0

    if output_path is not None:
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(output_path, index=False, float_format=FLOAT_FORMAT, encoding="utf-8")
        with open(output_path, "a", encoding="utf-8") as f:
            f.write(f"# {qoi}: {within:.2f}% of {len(frame)} points within +-{band:.0%}\n")

    logger.info(f"Scatter {qoi}: {within:.2f}% of {len(frame)} point(s) within +-{band:.0%}")
    return frame, within
