import argparse
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
from loguru import logger

from src.config import (
    ConfigLoader,
    get_config,
    get_logging_config,
    get_material_params,
    get_solver_settings,
    get_surrogate_config,
    reload_config,
)
from src.corrector.integrate import integrate_point, integrate_points
from src.corrector.load import ramp_load, triangle_load
from src.errors import (
    CapabilityError,
    FailureThresholdExceeded,
    InputError,
    ParameterDomainError,
    TrainingError,
    ValidationError,
)
from src.oracles.report import COMPARED_VARIABLES, verify_grid
from src.pipeline.field_io import read_elastic_field, read_load_history, write_frame, write_load_history
from src.pipeline.runner import RunConfig, run_correction
from src.pipeline.scatter import emit_scatter
from src.qoi.metrics import QOI_NAMES, QoIAccumulator
from src.surrogate.gp import load_model, save_model, train
from src.surrogate.training import QOI_SELECTORS, build_training_set
from src.utils.logging import setup_logging

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FAILURES = 2
EXIT_IO = 3

INPUT_ERRORS = (InputError, ValidationError, ParameterDomainError, CapabilityError, TrainingError)


def cmd_correct(args: argparse.Namespace, config: ConfigLoader) -> int:
    run_config = RunConfig.from_config(
        config,
        field_path=args.field,
        load_path=args.load,
        output_dir=args.output,
        mode=args.mode,
        model_path=args.model,
        workers=args.workers,
        chunk_size=args.chunk_size,
        qois=args.qoi,
        snapshots=args.snapshots,
        cycle_index=args.cycle_index,
        max_failure_fraction=args.max_failure_fraction,
    )
    run_correction(run_config)
    return EXIT_OK


def cmd_qoi(args: argparse.Namespace, config: ConfigLoader) -> int:
    """QoIs of individual points given by their elastic von Mises stress."""
    params = get_material_params(config)
    settings = get_solver_settings(config, params)
    load = read_load_history(args.load)
    sigma = np.asarray(args.sigma, dtype=np.float64)

    qois = [q for q in args.qoi or QOI_NAMES]
    accumulator = QoIAccumulator(sigma, params, load, args.cycle_index, qois=qois)
    integrate_points(sigma, load, params, settings, observer=accumulator)
    table = pd.DataFrame({"svm": sigma, **accumulator.results()})

    if args.output:
        write_frame(table, args.output)
    else:
        print(table.to_csv(index=False, float_format="%.17g"), end="")

    if args.series:
        if sigma.size != 1:
            raise InputError("--series needs exactly one --sigma value")
        write_frame(integrate_point(float(sigma[0]), load, params, settings).to_frame(), args.series)
    return EXIT_OK


def cmd_surrogate_train(args: argparse.Namespace, config: ConfigLoader) -> int:
    params = get_material_params(config)
    settings = get_solver_settings(config, params)
    recipe = get_surrogate_config(config)
    for key in ("n_s", "s_plus", "qoi", "seed"):
        if getattr(args, key, None) is not None:
            recipe[key] = getattr(args, key)
    if recipe["qoi"] not in QOI_SELECTORS:
        raise InputError(f"Unknown QoI selector '{recipe['qoi']}' (known: {', '.join(QOI_SELECTORS)})")

    load = read_load_history(args.load)
    inputs, targets = build_training_set(
        params, load, recipe["n_s"], recipe["s_plus"], recipe["qoi"], settings,
        floor_value=recipe["floor_value"], onset_samples=recipe["onset_samples"],
    )
    model = train(
        inputs,
        targets,
        floor_value=recipe["floor_value"],
        qoi=recipe["qoi"],
        upper_limit=recipe["extrapolation_guard"] * recipe["s_plus"] * params.sigma_y,
        restarts=recipe["restarts"],
        seed=recipe["seed"],
    )
    save_model(model, args.output)
    return EXIT_OK


def cmd_surrogate_predict(args: argparse.Namespace, config: ConfigLoader) -> int:
    model = load_model(args.model)
    if args.field:
        elastic = read_elastic_field(args.field)
        ids, sigma = elastic.ids, elastic.sigma_vm_sharp
    elif args.sigma:
        sigma = np.asarray(args.sigma, dtype=np.float64)
        ids = [str(j) for j in range(sigma.size)]
    else:
        raise InputError("surrogate predict needs --field or --sigma")

    values, outside = model.predict(sigma, return_extrapolation=True)
    table = pd.DataFrame({"id": ids, model.qoi: values, "extrapolated": outside})
    if args.output:
        write_frame(table, args.output)
    else:
        print(table.to_csv(index=False, float_format="%.17g"), end="")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, config: ConfigLoader) -> int:
    params = get_material_params(config)
    settings = get_solver_settings(config, params)
    report = verify_grid(params, settings, stress_factors=args.factors)
    write_frame(report, args.output)

    worst = float(report[[f"max_rel_{n}" for n in COMPARED_VARIABLES]].to_numpy().max())
    if worst > args.tolerance:
        raise FailureThresholdExceeded(
            f"Scalar/tensorial difference {worst:.3e} exceeds tolerance {args.tolerance:.1e}"
        )
    logger.info(f"Verification passed (worst {worst:.3e} <= {args.tolerance:.1e}), report: {args.output}")
    return EXIT_OK


def cmd_scatter(args: argparse.Namespace, config: ConfigLoader) -> int:
    emit_scatter(args.a, args.b, args.qoi, args.output, band=args.band)
    return EXIT_OK


def cmd_make_load(args: argparse.Namespace, config: ConfigLoader) -> int:
    if args.shape == "ramp":
        load = ramp_load(args.amplitude, args.steps)
    else:
        load = triangle_load(args.amplitude, args.cycles, args.steps)
    write_load_history(load, args.output)
    logger.info(f"Load history written: {args.output} ({len(load)} samples)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plastic-corrector",
        description="Scalar plastic corrector for elastic FE fields under proportional loading",
    )
    parser.add_argument("--config", help="YAML config (default: CONFIG_FILE or configs/default.yaml)")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING, ERROR")
    parser.add_argument("--log-file", help="Also log to this rotated file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("correct", help="Run the corrector over an elastic field")
    p.add_argument("--field", required=True, type=Path, help="Elastic field CSV (id,svm[,s11..s23,tr])")
    p.add_argument("--load", required=True, type=Path, help="Load history CSV (t,f)")
    p.add_argument("--output", required=True, type=Path, help="Output directory")
    p.add_argument("--mode", choices=["direct", "surrogate"])
    p.add_argument("--model", type=Path, help="Surrogate model JSON (surrogate mode)")
    p.add_argument("--workers", type=int)
    p.add_argument("--chunk-size", type=int)
    p.add_argument("--qoi", nargs="+", choices=QOI_NAMES)
    p.add_argument("--snapshots", nargs="+", type=int, help="Load sample indices to write")
    p.add_argument("--cycle-index", type=int, help="Cycle for delta_p (1-based, -1 = last)")
    p.add_argument("--max-failure-fraction", type=float)
    p.set_defaults(handler=cmd_correct)

    p = sub.add_parser("qoi", help="QoIs of single points")
    p.add_argument("--load", required=True, type=Path)
    p.add_argument("--sigma", required=True, nargs="+", type=float, help="sigma_vm_sharp values [MPa]")
    p.add_argument("--qoi", nargs="+", choices=QOI_NAMES)
    p.add_argument("--cycle-index", type=int, default=-1)
    p.add_argument("--output", type=Path, help="CSV (default: stdout)")
    p.add_argument("--series", type=Path, help="Write the full state history of the (single) point")
    p.set_defaults(handler=cmd_qoi)

    p = sub.add_parser("surrogate", help="Train or apply the GP surrogate")
    surrogate = p.add_subparsers(dest="surrogate_command", required=True)
    t = surrogate.add_parser("train")
    t.add_argument("--load", required=True, type=Path)
    t.add_argument("--output", required=True, type=Path, help="Model JSON")
    t.add_argument("--n-s", dest="n_s", type=int)
    t.add_argument("--s-plus", dest="s_plus", type=float)
    t.add_argument("--qoi", choices=list(QOI_SELECTORS))
    t.add_argument("--seed", type=int)
    t.set_defaults(handler=cmd_surrogate_train)
    pr = surrogate.add_parser("predict")
    pr.add_argument("--model", required=True, type=Path)
    pr.add_argument("--field", type=Path)
    pr.add_argument("--sigma", nargs="+", type=float)
    pr.add_argument("--output", type=Path)
    pr.set_defaults(handler=cmd_surrogate_predict)

    p = sub.add_parser("verify", help="Compare the scalar corrector with the tensorial oracle")
    p.add_argument("--output", required=True, type=Path, help="Report CSV")
    p.add_argument("--factors", nargs="+", type=float, default=[0.5, 1.0, 1.5, 2.0, 4.0, 8.0, 12.0],
                   help="sigma_vm_sharp / sigma_y values")
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("scatter", help="Pair a QoI between two qoi.csv files")
    p.add_argument("--a", required=True, type=Path)
    p.add_argument("--b", required=True, type=Path, help="Reference run")
    p.add_argument("--qoi", required=True)
    p.add_argument("--output", required=True, type=Path)
    p.add_argument("--band", type=float, default=0.2)
    p.set_defaults(handler=cmd_scatter)

    p = sub.add_parser("make-load", help="Write a ramp or triangle load history")
    p.add_argument("shape", choices=["ramp", "triangle"])
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=1000, help="Ramp steps / steps per quarter cycle")
    p.add_argument("--cycles", type=int, default=1)
    p.add_argument("--output", required=True, type=Path)
    p.set_defaults(handler=cmd_make_load)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        config = reload_config(args.config) if args.config else get_config()
        log_config = get_logging_config(config)
        setup_logging(args.log_level or log_config["level"], args.log_file or log_config["file"])
        return args.handler(args, config)
    except FailureThresholdExceeded as e:
        logger.error(str(e))
        return EXIT_FAILURES
    except INPUT_ERRORS as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_INPUT
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
