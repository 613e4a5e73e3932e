"""
Field-run throughput and determinism check.

Writes a synthetic scalar field (log-uniform svm on [0.1, 12] sigma_y) and a
20-cycle triangle load, runs the direct corrector with 1 and N workers, and
reports point-steps per second. qoi.csv must be byte-identical across runs.

Usage:
    PYTHONPATH=. python scripts/benchmark_throughput.py --points 50000 --workers 4
"""
import argparse
import shutil
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from src.corrector.load import triangle_load
from src.corrector.state import SolverSettings
from src.material.params import MaterialParams
from src.pipeline.field_io import write_frame, write_load_history
from src.pipeline.runner import RunConfig, run_correction
from src.utils.logging import setup_logging


def run_once(workdir: Path, name: str, params: MaterialParams, workers: int, chunk_size: int) -> dict:
    config = RunConfig(
        field_path=workdir / "field.csv",
        load_path=workdir / "load.csv",
        output_dir=workdir / name,
        params=params,
        settings=SolverSettings.for_material(params),
        workers=workers,
        chunk_size=chunk_size,
    )
    return run_correction(config)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    parser.add_argument("--points", type=int, default=50_000)
    parser.add_argument("--cycles", type=int, default=20)
    parser.add_argument("--steps", type=int, default=25, help="Steps per quarter cycle")
    parser.add_argument("--workers", type=int, default=4)
    parser.add_argument("--chunk-size", type=int, default=4096)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    setup_logging("WARNING")
    params = MaterialParams.preset("notched_plate")
    rng = np.random.default_rng(args.seed)
    svm = params.sigma_y * np.exp(rng.uniform(np.log(0.1), np.log(12.0), args.points))

    workdir = Path(tempfile.mkdtemp(prefix="plastcorr-bench-"))
    try:
        write_frame(pd.DataFrame({"id": [f"n{j}" for j in range(args.points)], "svm": svm}), workdir / "field.csv")
        write_load_history(triangle_load(1.0, args.cycles, args.steps), workdir / "load.csv")

        print(f"{'Run':<12} | {'Workers':<8} | {'Wall':<10} | {'Point-steps/s':<14}")
        print("-" * 52)
        outputs = []
        for name, workers in [("serial", 1), ("pooled", args.workers)]:
            summary = run_once(workdir, name, params, workers, args.chunk_size)
            outputs.append((workdir / name / "qoi.csv").read_bytes())
            print(f"{name:<12} | {workers:<8} | {summary['wall_time_s']:<9.3f}s | {summary['point_steps_per_s']:<14.3e}")

        identical = outputs[0] == outputs[1]
        print(f"\nqoi.csv identical across worker counts: {identical}")
        if not identical:
            logger.error("Outputs differ between worker counts")
            raise SystemExit(1)
    finally:
        shutil.rmtree(workdir, ignore_errors=True)


if __name__ == "__main__":
    main()
