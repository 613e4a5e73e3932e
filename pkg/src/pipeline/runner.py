"""
Field runs: the scalar corrector (or its surrogate) over every point of an
elastic field, chunked across worker processes.
"""
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from src.config import (
    ConfigLoader,
    get_material_params,
    get_pipeline_config,
    get_solver_settings,
)
from src.corrector.integrate import iter_states
from src.corrector.load import LoadHistory
from src.corrector.state import SolverSettings
from src.errors import FailureThresholdExceeded, InputError, PointFailure
from src.material.params import MaterialParams
from src.pipeline.field_io import (
    ElasticField,
    read_elastic_field,
    read_load_history,
    write_failures,
    write_frame,
    write_summary,
)
from src.qoi.metrics import QOI_NAMES, QoIAccumulator, cycle_window, cycle_windows
from src.surrogate.gp import load_model
from src.utils.parallel import chunk_slices, parallel_map

SNAPSHOT_COLUMNS = ("s", "e", "e_p", "p_hat", "x")


@dataclass
class RunConfig:
    """Everything a field run needs; built from the YAML config plus CLI overrides."""
    field_path: Path
    load_path: Path
    output_dir: Path
    params: MaterialParams
    settings: SolverSettings
    mode: str = "direct"
    qois: Sequence[str] = QOI_NAMES
    snapshots: Sequence[int] = ()
    cycle_index: int = -1
    workers: int = 1
    chunk_size: int = 4096
    max_failure_fraction: float = 0.01
    model_path: Optional[Path] = None

    def __post_init__(self):
        self.field_path = Path(self.field_path)
        self.load_path = Path(self.load_path)
        self.output_dir = Path(self.output_dir)
        if self.model_path is not None:
            self.model_path = Path(self.model_path)

        if self.mode not in ("direct", "surrogate"):
            raise InputError(f"mode must be 'direct' or 'surrogate', got {self.mode!r}")
        if self.mode == "surrogate" and self.model_path is None:
            raise InputError("Surrogate mode needs a model path")
        if not self.qois:
            raise InputError("QoI list is empty")
        unknown = [q for q in self.qois if q not in QOI_NAMES]
        if unknown:
            raise InputError(f"Unknown QoI(s): {', '.join(unknown)} (known: {', '.join(QOI_NAMES)})")
        if self.workers < 1 or self.chunk_size < 1:
            raise InputError("workers and chunk_size must be >= 1")
        if not 0.0 <= self.max_failure_fraction <= 1.0:
            raise InputError(f"max_failure_fraction must be in [0, 1], got {self.max_failure_fraction}")

    def validate_against(self, load: LoadHistory) -> None:
        bad = [i for i in self.snapshots if not 0 <= int(i) < len(load)]
        if bad:
            raise InputError(f"Snapshot indices out of range [0, {len(load) - 1}]: {bad}")
        if self.mode != "direct" or "delta_p" not in self.qois:
            return
        if self.cycle_index == -1 and not cycle_windows(load):
            logger.warning("Load history has no complete cycle; delta_p dropped from the outputs")
            self.qois = [q for q in self.qois if q != "delta_p"]
            if not self.qois:
                raise InputError("No QoI left to compute")
        else:
            cycle_window(load, self.cycle_index)

    @classmethod
    def from_config(cls, config: ConfigLoader, **overrides: Any) -> "RunConfig":
        """Config-file values with non-None overrides applied on top."""
        params = get_material_params(config)
        pipeline = get_pipeline_config(config)
        values: Dict[str, Any] = {
            "params": params,
            "settings": get_solver_settings(config, params),
            "mode": pipeline["mode"],
            "qois": list(pipeline["qois"]),
            "snapshots": [int(i) for i in pipeline["snapshots"]],
            "cycle_index": int(pipeline["cycle_index"]),
            "workers": pipeline["workers"],
            "chunk_size": pipeline["chunk_size"],
            "max_failure_fraction": pipeline["max_failure_fraction"],
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass
class ChunkTask:
    ids: List[str]
    sigma_vm_sharp: np.ndarray
    load: LoadHistory
    params: MaterialParams
    settings: SolverSettings
    qois: Tuple[str, ...]
    snapshots: Tuple[int, ...]
    cycle_index: int


@dataclass
class ChunkResult:
    qois: Dict[str, np.ndarray]
    snapshots: Dict[int, Dict[str, np.ndarray]] = field(default_factory=dict)
    failures: List[PointFailure] = field(default_factory=list)


def correct_chunk(task: ChunkTask) -> ChunkResult:
    """Integrate one chunk of points, streaming QoIs and requested snapshots."""
    accumulator = QoIAccumulator(task.sigma_vm_sharp, task.params, task.load, task.cycle_index, qois=task.qois)
    wanted = set(task.snapshots)
    snapshots: Dict[int, Dict[str, np.ndarray]] = {}
    failures: List[PointFailure] = []

    for i, state, step_failures in iter_states(task.sigma_vm_sharp, task.load, task.params, task.settings, task.ids):
        accumulator(i, state)
        failures.extend(step_failures)
        if i in wanted:
            snapshots[i] = {name: getattr(state, name).copy() for name in SNAPSHOT_COLUMNS}
            snapshots[i]["f_y"] = state.f_y.copy()

    return ChunkResult(accumulator.results(), snapshots, failures)


def _direct(config: RunConfig, elastic: ElasticField, load: LoadHistory) -> ChunkResult:
    tasks = [
        ChunkTask(
            ids=elastic.ids[sl],
            sigma_vm_sharp=elastic.sigma_vm_sharp[sl],
            load=load,
            params=config.params,
            settings=config.settings,
            qois=tuple(config.qois),
            snapshots=tuple(int(i) for i in config.snapshots),
            cycle_index=config.cycle_index,
        )
        for sl in chunk_slices(len(elastic), config.chunk_size)
    ]
    results = parallel_map(correct_chunk, tasks, config.workers)

    merged = ChunkResult(
        qois={name: np.concatenate([r.qois[name] for r in results]) for name in config.qois},
        failures=[f for r in results for f in r.failures],
    )
    for i in config.snapshots:
        merged.snapshots[int(i)] = {
            name: np.concatenate([r.snapshots[int(i)][name] for r in results])
            for name in results[0].snapshots[int(i)]
        }
    return merged


def _surrogate(config: RunConfig, elastic: ElasticField) -> ChunkResult:
    model = load_model(config.model_path)
    if config.snapshots:
        logger.warning("Snapshots are not available in surrogate mode; ignoring them")
    logger.info(f"Surrogate mode: predicting {model.qoi} for {len(elastic)} point(s)")
    return ChunkResult(qois={model.qoi: model.predict(elastic.sigma_vm_sharp)})


def run_correction(config: RunConfig) -> Dict[str, Any]:
    """
    Run the corrector over a field and write the outputs into config.output_dir:
    qoi.csv, snapshot_<i>.csv, failures.csv and summary.json. Rows keep the
    input file order.

    Returns:
        The run summary (also written to summary.json)

    Raises:
        FailureThresholdExceeded: After writing outputs, if too many points failed.
    """
    elastic = read_elastic_field(config.field_path)
    load = read_load_history(config.load_path)
    config.validate_against(load)

    started = time.perf_counter()
    if config.mode == "direct":
        result = _direct(config, elastic, load)
    else:
        result = _surrogate(config, elastic)
    elapsed = time.perf_counter() - started

    out = config.output_dir
    qoi_frame = pd.DataFrame({"id": elastic.ids, **result.qois})
    write_frame(qoi_frame, out / "qoi.csv")
    for i, columns in result.snapshots.items():
        frame = pd.DataFrame({"id": elastic.ids, "t": load.times[i], "f": load.values[i], **columns})
        write_frame(frame, out / f"snapshot_{i}.csv")
    write_failures(result.failures, out / "failures.csv")

    failed_points = len({f.point_id for f in result.failures})
    point_steps = len(elastic) * (len(load) - 1) if config.mode == "direct" else 0
    summary = {
        "mode": config.mode,
        "points": len(elastic),
        "steps": len(load) - 1,
        "workers": config.workers,
        "chunk_size": config.chunk_size,
        "wall_time_s": elapsed,
        "point_steps_per_s": point_steps / elapsed if elapsed > 0.0 else None,
        "failed_points": failed_points,
        "failure_records": len(result.failures),
    }
    write_summary(summary, out / "summary.json")
    logger.info(
        f"Run finished: {len(elastic)} point(s) x {len(load) - 1} step(s) in {elapsed:.2f}s"
        + (f" ({summary['point_steps_per_s']:.3e} point-steps/s)" if summary["point_steps_per_s"] else "")
    )

    fraction = failed_points / len(elastic) if len(elastic) else 0.0
    if fraction > config.max_failure_fraction:
        raise FailureThresholdExceeded(
            f"{failed_points} of {len(elastic)} point(s) failed ({fraction:.2%} > {config.max_failure_fraction:.2%})"
        )
    return summary
