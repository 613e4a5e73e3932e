"""
Time integration of the scalar corrector over a load history.

`iter_states` is the streaming kernel: it yields the state of every point
at every sample without storing the history. `integrate_points` and
`integrate_point` collect it into a CorrectedSeries.
"""
from typing import Callable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from src.corrector.load import LoadHistory
from src.corrector.state import STATE_FIELDS, CorrectedSeries, SolverSettings, StateArrays
from src.corrector.stepper import advance, yield_function
from src.errors import InputError, PointFailure
from src.material.params import MaterialParams

StateObserver = Callable[[int, StateArrays], None]


def _as_stress_array(sigma_vm_sharp: Union[float, Sequence[float], np.ndarray]) -> np.ndarray:
    sigma = np.atleast_1d(np.asarray(sigma_vm_sharp, dtype=np.float64)).ravel()
    if not np.all(np.isfinite(sigma)):
        raise InputError("sigma_vm_sharp contains non-finite values")
    if np.any(sigma < 0.0):
        raise InputError(f"sigma_vm_sharp must be >= 0, got min {sigma.min()}")
    return sigma


def _origin_samples(load: LoadHistory) -> set:
    """Reversal samples, plus sample 0 when the first real branch runs back through zero."""
    samples = set(int(i) for i in load.reversal_indices)
    f0 = load.values[0]
    if f0 != 0.0:
        steps = np.sign(np.diff(load.values))
        moving = steps[steps != 0.0]
        # Virgin material sits at f = 0, so reaching f0 is a branch of its own
        if moving.size and moving[0] != np.sign(f0):
            samples.add(0)
    return samples


def iter_states(
    sigma_vm_sharp: Union[float, Sequence[float], np.ndarray],
    load: LoadHistory,
    params: MaterialParams,
    settings: Optional[SolverSettings] = None,
    point_ids: Optional[Sequence[str]] = None,
) -> Iterator[Tuple[int, StateArrays, List[PointFailure]]]:
    """
    Integrate all points over the load history, one sample at a time.

    Origins are re-anchored at every reversal sample before stepping past it,
    so the state yielded at a reversal still carries the previous origins.

    Args:
        sigma_vm_sharp: Elastic von Mises stress at f=1, scalar or per point
        load: Load history
        params: Material parameters
        settings: Solver controls (default: tolerance 1e-9 * sigma_y)
        point_ids: Identifiers used in failure records

    Yields:
        (sample index, state at that sample, failures raised by that step)
    """
    sigma = _as_stress_array(sigma_vm_sharp)
    settings = settings or SolverSettings.for_material(params)
    if point_ids is not None and len(point_ids) != sigma.size:
        raise InputError(f"{len(point_ids)} point ids for {sigma.size} points")

    values = load.values
    origins = _origin_samples(load)

    state = StateArrays.virgin(sigma.size)
    state.f_y = yield_function(state.s, state.x, state.p_hat, sigma, params)
    state, failures = advance(state, float(values[0]), sigma, params, settings, point_ids, time_index=0)
    yield 0, state, failures

    for i in range(len(load) - 1):
        if i in origins:
            state = state.reanchor()
        state, failures = advance(state, float(values[i + 1]), sigma, params, settings, point_ids, time_index=i + 1)
        yield i + 1, state, failures


def integrate_points(
    sigma_vm_sharp: Union[Sequence[float], np.ndarray],
    load: LoadHistory,
    params: MaterialParams,
    settings: Optional[SolverSettings] = None,
    point_ids: Optional[Sequence[str]] = None,
    observer: Optional[StateObserver] = None,
) -> Optional[CorrectedSeries]:
    """
    Integrate a batch of points and collect the full history.

    With an observer, each sample's state is handed to it instead and nothing
    is stored (None is returned).

    Returns:
        CorrectedSeries with (n_times, n_points) arrays, or None with an observer
    """
    sigma = _as_stress_array(sigma_vm_sharp)
    names = STATE_FIELDS + ("f_y",)
    history = {name: [] for name in names}
    failures: List[PointFailure] = []

    for i, state, step_failures in iter_states(sigma, load, params, settings, point_ids):
        failures.extend(step_failures)
        if observer is not None:
            observer(i, state)
            continue
        for name in names:
            history[name].append(getattr(state, name))

    if failures:
        logger.warning(f"{len(failures)} point failure(s) over {len(load)} samples")
    if observer is not None:
        return None

    return CorrectedSeries(
        times=load.times,
        f=load.values,
        sigma_vm_sharp=sigma,
        failures=failures,
        point_ids=None if point_ids is None else list(point_ids),
        **{name: np.vstack(rows) for name, rows in history.items()},
    )


def integrate_point(
    sigma_vm_sharp: float,
    load: LoadHistory,
    params: MaterialParams,
    settings: Optional[SolverSettings] = None,
) -> CorrectedSeries:
    """One-point series (1-D arrays) for a single elastic stress value."""
    series = integrate_points([float(sigma_vm_sharp)], load, params, settings)
    return series.point(0)
