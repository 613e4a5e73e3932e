"""
CSV readers and writers for elastic fields, load histories and run outputs.

Elastic field: header-mandatory UTF-8 CSV with columns
`id,svm[,s11,s22,s33,s12,s13,s23,tr]` (MPa, f=1 elastic state; s_ij are
deviatoric components). Outputs are written with 17 significant digits.
"""
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger

from src.corrector.load import LoadHistory
from src.errors import InputError, PointFailure, ValidationError
from src.material.tensors import deviatoric, frobenius_norm, trace, von_mises
from src.qoi.records import DEVIATOR_TRACE_TOLERANCE, SVM_MATCH_TOLERANCE, ElasticPointRecord

TENSOR_COLUMNS = ["s11", "s22", "s33", "s12", "s13", "s23"]
TRACE_COLUMN = "tr"
FLOAT_FORMAT = "%.17g"

PathLike = Union[str, Path]


@dataclass
class ElasticField:
    """Column-wise elastic field; indexing yields ElasticPointRecord rows."""
    ids: List[str]
    sigma_vm_sharp: np.ndarray
    dev_sigma_sharp: Optional[np.ndarray] = None     # (n, 6)
    trace_sigma_sharp: Optional[np.ndarray] = None   # (n,)

    def __len__(self) -> int:
        return len(self.ids)

    def __getitem__(self, j: int) -> ElasticPointRecord:
        return ElasticPointRecord(
            self.ids[j],
            float(self.sigma_vm_sharp[j]),
            None if self.dev_sigma_sharp is None else self.dev_sigma_sharp[j],
            None if self.trace_sigma_sharp is None else float(self.trace_sigma_sharp[j]),
        )

    def __iter__(self) -> Iterator[ElasticPointRecord]:
        return (self[j] for j in range(len(self)))

    @property
    def has_tensors(self) -> bool:
        return self.dev_sigma_sharp is not None


def _line_numbers(rows: Sequence[int], limit: int = 10) -> str:
    # +2: header line and 1-based numbering
    return ", ".join(str(int(i) + 2) for i in list(rows)[:limit])


def read_elastic_field(path: PathLike) -> ElasticField:
    """
    Read an elastic field CSV.

    Raises:
        FileNotFoundError: If the file is missing.
        InputError: Missing columns, malformed numbers (with line numbers), negative svm.
        ValidationError: Duplicate ids, non-deviatoric tensors, svm/tensor mismatch (lists ids).
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Elastic field not found: {path}")

    try:
        df = pd.read_csv(path, dtype={"id": str}, encoding="utf-8", skipinitialspace=True,
                         float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise InputError(f"Cannot parse elastic field {path}: {e}") from e

    df.columns = [str(c).strip() for c in df.columns]
    if "id" not in df.columns:
        raise InputError(f"Elastic field {path} lacks the 'id' column")
    if df.empty:
        raise InputError(f"Elastic field {path} has no rows")

    present = [c for c in TENSOR_COLUMNS if c in df.columns]
    if present and len(present) != len(TENSOR_COLUMNS):
        missing = [c for c in TENSOR_COLUMNS if c not in df.columns]
        raise InputError(f"Elastic field {path} has partial tensor columns, missing: {', '.join(missing)}")
    has_tensors = bool(present)
    if "svm" not in df.columns and not has_tensors:
        raise InputError(f"Elastic field {path} needs 'svm' or the deviatoric columns {TENSOR_COLUMNS}")

    if df["id"].isna().any():
        raise InputError(f"Empty id in {path} at line(s) {_line_numbers(np.flatnonzero(df['id'].isna()))}")
    ids = [s.strip() for s in df["id"].tolist()]
    duplicated = pd.Series(ids)[pd.Series(ids).duplicated()].unique().tolist()
    if duplicated:
        raise ValidationError(f"Duplicate ids in {path}", duplicated)

    numeric_columns = [c for c in ["svm"] + TENSOR_COLUMNS + [TRACE_COLUMN] if c in df.columns]
    numeric = df[numeric_columns].apply(pd.to_numeric, errors="coerce")
    bad = np.flatnonzero(~np.isfinite(numeric.to_numpy(dtype=np.float64)).all(axis=1))
    if bad.size:
        raise InputError(f"Malformed elastic field rows in {path} at line(s) {_line_numbers(bad)}")

    dev = None
    if has_tensors:
        raw = numeric[TENSOR_COLUMNS].to_numpy(dtype=np.float64)
        norms = frobenius_norm(raw)
        off_trace = np.abs(trace(raw)) > DEVIATOR_TRACE_TOLERANCE * np.maximum(norms, 1.0)
        if off_trace.any():
            raise ValidationError("Deviatoric stress columns have a non-zero trace",
                                  [ids[j] for j in np.flatnonzero(off_trace)])
        dev = deviatoric(raw)

    if "svm" in numeric.columns:
        svm = numeric["svm"].to_numpy(dtype=np.float64)
        negative = np.flatnonzero(svm < 0.0)
        if negative.size:
            raise InputError(f"Negative svm in {path} at line(s) {_line_numbers(negative)}")
        if dev is not None:
            svm_tensor = von_mises(dev)
            mismatch = np.abs(svm_tensor - svm) > SVM_MATCH_TOLERANCE * np.maximum(svm_tensor, svm)
            if mismatch.any():
                raise ValidationError("svm disagrees with the deviatoric columns",
                                      [ids[j] for j in np.flatnonzero(mismatch)])
    else:
        svm = von_mises(dev)

    tr = numeric[TRACE_COLUMN].to_numpy(dtype=np.float64) if TRACE_COLUMN in numeric.columns else None
    field = ElasticField(ids, svm, dev, tr)
    logger.info(f"Elastic field {path}: {len(field)} point(s), tensors={'yes' if has_tensors else 'no'}")
    return field


def read_load_history(path: PathLike) -> LoadHistory:
    """Read a `t,f` load history CSV."""
    return LoadHistory.from_csv(path)


def write_elastic_field(field: ElasticField, path: PathLike) -> Path:
    data: Dict[str, Any] = {"id": field.ids, "svm": field.sigma_vm_sharp}
    if field.dev_sigma_sharp is not None:
        for k, name in enumerate(TENSOR_COLUMNS):
            data[name] = field.dev_sigma_sharp[:, k]
    if field.trace_sigma_sharp is not None:
        data[TRACE_COLUMN] = field.trace_sigma_sharp
    return write_frame(pd.DataFrame(data), path)


def write_load_history(load: LoadHistory, path: PathLike) -> Path:
    return write_frame(load.to_frame(), path)


def write_frame(df: pd.DataFrame, path: PathLike) -> Path:
    """CSV with 17 significant digits (round-trips float64 exactly)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, encoding="utf-8")
    return path


def write_failures(failures: Sequence[PointFailure], path: PathLike) -> Path:
    """Failure sidecar; the header is written even when there are no failures."""
    df = pd.DataFrame(
        [(f.point_id, f.time_index, f.message) for f in failures],
        columns=["id", "time_index", "message"],
    )
    return write_frame(df, path)


def write_summary(summary: Dict[str, Any], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(summary, indent=2, sort_keys=True), encoding="utf-8")
    return path
