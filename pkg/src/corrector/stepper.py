"""
Fully implicit step of the reduced (scalar) plastic corrector.

For a load increment f_prev -> f_next the Neuber relation
(s - s_o)(e - e_o) = (f - f_o)^2 and the stress-strain relation
(s - s_o) = (e - e_o) - (e_p - e_p_o) give s as a closed-form function of e_p.
The plastic update then solves f_y(s(e_p), x(e_p), p_hat(e_p)) = 0 by Newton
iterations with a central finite-difference slope, falling back to bisection.

Everything is vectorised over points; the load value is shared by all points.
Each point iterates under its own mask, so its result never depends on the
other points in the batch.
"""
from dataclasses import replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from src.corrector.state import Origins, ScalarCorrectorState, SolverSettings, StateArrays
from src.errors import ConvergenceError, PointFailure
from src.material.hardening import saturation
from src.material.params import MaterialParams

# Points with sigma_vm_sharp below this fraction of sigma_y stay on the elastic identity
NEGLIGIBLE_STRESS_RATIO = 1e-12

Scalar = Union[float, np.ndarray]


def _neuber_stress_ratio(e_p: Scalar, direction: float, delta_f: Scalar, s_o: Scalar, e_p_o: Scalar) -> Scalar:
    """Root of (s-s_o)^2 + (e_p-e_p_o)(s-s_o) - (f-f_o)^2 = 0 picked by loading direction."""
    delta = e_p - e_p_o
    return s_o + 0.5 * (-delta + direction * np.sqrt(delta * delta + 4.0 * delta_f * delta_f))


def trial_stress_ratio(e_p_prev: Scalar, f_next: float, f_prev: float, origins: Optional[Origins] = None) -> Scalar:
    """
    Elastic-trial stress ratio s* for the increment f_prev -> f_next.

    The positive root is taken for increasing f, the negative one for
    decreasing f. Plateaus (f_next == f_prev) are the caller's no-op.

    Args:
        e_p_prev: Plastic-strain ratio at the start of the step
        f_next: Load value at the end of the step
        f_prev: Load value at the start of the step
        origins: Neuber origins (zeros on the first branch)

    Returns:
        s* (same shape as e_p_prev)
    """
    origins = origins or Origins()
    direction = float(np.sign(f_next - f_prev))
    return _neuber_stress_ratio(e_p_prev, direction, f_next - origins.f_o, origins.s_o, origins.e_p_o)


def yield_function(s: Scalar, x: Scalar, p_hat: Scalar, sigma_vm_sharp: Scalar, params: MaterialParams) -> Scalar:
    """f_y = |s - x/(2 mu)| sigma_vm_sharp - sigma_y - R(p_hat)."""
    return (
        np.abs(s - x / (2.0 * params.mu)) * sigma_vm_sharp
        - params.sigma_y
        - saturation(p_hat, params.Q, params.b)
    )


class _PlasticProblem:
    """Residual f_y as a function of the flow magnitude lam = |e_p - e_p_prev| for yielding points."""

    def __init__(
        self,
        sigma: np.ndarray,
        e_p_prev: np.ndarray,
        x_prev: np.ndarray,
        p_prev: np.ndarray,
        s_o: np.ndarray,
        e_p_o: np.ndarray,
        delta_f: np.ndarray,
        flow: np.ndarray,
        direction: float,
        params: MaterialParams,
    ):
        self.sigma = sigma
        self.e_p_prev = e_p_prev
        self.x_prev = x_prev
        self.p_prev = p_prev
        self.s_o = s_o
        self.e_p_o = e_p_o
        self.delta_f = delta_f
        self.flow = flow
        self.direction = direction
        self.params = params

    @property
    def size(self) -> int:
        return self.sigma.size

    def residual(self, lam: np.ndarray, k: Optional[np.ndarray] = None) -> np.ndarray:
        if k is None:
            k = slice(None)
        params = self.params
        sigma = self.sigma[k]
        d_e_p = self.flow[k] * lam
        d_p = lam * sigma / (3.0 * params.mu)
        x = (self.x_prev[k] + (2.0 / 3.0) * params.C * d_e_p) / (1.0 + params.D * d_p)
        s = _neuber_stress_ratio(
            self.e_p_prev[k] + d_e_p, self.direction, self.delta_f[k], self.s_o[k], self.e_p_o[k]
        )
        return yield_function(s, x, self.p_prev[k] + d_p, sigma, params)


def _newton(problem: _PlasticProblem, g0: np.ndarray, settings: SolverSettings) -> Tuple[np.ndarray, np.ndarray]:
    """Masked Newton on lam >= 0; one extra polishing update after |f_y| <= tol."""
    tol = settings.fy_tolerance
    lam = np.zeros(problem.size)
    g = g0.copy()
    done = np.zeros(problem.size, dtype=bool)

    for _ in range(settings.max_newton_iters):
        work = np.flatnonzero(~done)
        if work.size == 0:
            break

        lam_w = lam[work]
        g_w = g[work]
        h = np.maximum(settings.fd_step, settings.fd_step * np.abs(problem.e_p_prev[work] + problem.flow[work] * lam_w))
        slope = (problem.residual(lam_w + h, work) - problem.residual(lam_w - h, work)) / (2.0 * h)

        usable = np.isfinite(slope) & (slope < 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            candidate = np.where(usable, lam_w - g_w / np.where(usable, slope, 1.0), lam_w)
        candidate = np.where(candidate < 0.0, 0.5 * lam_w, candidate)
        g_candidate = problem.residual(candidate, work)

        polishing = np.abs(g_w) <= tol
        accept = usable & (~polishing | (np.abs(g_candidate) <= np.abs(g_w)))
        lam[work] = np.where(accept, candidate, lam_w)
        g[work] = np.where(accept, g_candidate, g_w)
        done[work] = polishing | ~usable

    return lam, g


def _bisect(problem: _PlasticProblem, k: int, lam_start: float, settings: SolverSettings) -> Tuple[float, float, bool]:
    """Bracket-and-bisect fallback for a single point; f_y(0) > 0 by construction."""
    tol = settings.fy_tolerance
    index = np.array([k])

    def g(lam: float) -> float:
        return float(problem.residual(np.array([lam]), index)[0])

    lo, hi = 0.0, max(lam_start, settings.fd_step)
    g_hi = g(hi)
    for _ in range(settings.max_bracket_doublings):
        if g_hi <= 0.0:
            break
        lo, hi = hi, 2.0 * hi
        g_hi = g(hi)
    else:
        return hi, g_hi, False

    if abs(g_hi) <= tol:
        return hi, g_hi, True

    for _ in range(settings.max_bisection_iters):
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if abs(g_mid) <= tol:
            return mid, g_mid, True
        if g_mid > 0.0:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    g_mid = g(mid)
    return mid, g_mid, abs(g_mid) <= tol


def advance(
    state: StateArrays,
    f_next: float,
    sigma_vm_sharp: np.ndarray,
    params: MaterialParams,
    settings: SolverSettings,
    point_ids: Optional[Sequence[str]] = None,
    time_index: int = -1,
) -> Tuple[StateArrays, List[PointFailure]]:
    """
    Advance all points from state.f to f_next.

    Args:
        state: Converged state at f_prev = state.f
        f_next: Load value at the end of the step
        sigma_vm_sharp: Elastic von Mises stress at f=1 per point (>= 0)
        params: Material parameters
        settings: Solver controls
        point_ids: Identifiers used in failure records (defaults to indices)
        time_index: Sample index reported in failure records

    Returns:
        (new state, failure records). Failed points keep the best iterate.
    """
    f_prev = state.f
    n = state.n_points
    if f_next == f_prev:
        return replace(state, failed=np.zeros(n, dtype=bool)), []

    direction = 1.0 if f_next > f_prev else -1.0
    two_mu = 2.0 * params.mu
    delta_f = f_next - state.f_o

    s = _neuber_stress_ratio(state.e_p, direction, delta_f, state.s_o, state.e_p_o)
    xi_trial = s - state.x / two_mu
    fy_trial = np.abs(xi_trial) * sigma_vm_sharp - params.sigma_y - saturation(state.p_hat, params.Q, params.b)

    negligible = sigma_vm_sharp < NEGLIGIBLE_STRESS_RATIO * params.sigma_y
    plastic = np.flatnonzero((fy_trial > 0.0) & ~negligible)

    e_p = state.e_p.copy()
    x = state.x.copy()
    p_hat = state.p_hat.copy()
    failed = np.zeros(n, dtype=bool)
    failures: List[PointFailure] = []

    if plastic.size:
        problem = _PlasticProblem(
            sigma=sigma_vm_sharp[plastic],
            e_p_prev=state.e_p[plastic],
            x_prev=state.x[plastic],
            p_prev=state.p_hat[plastic],
            s_o=state.s_o[plastic],
            e_p_o=state.e_p_o[plastic],
            delta_f=delta_f[plastic],
            flow=np.sign(xi_trial[plastic]),
            direction=direction,
            params=params,
        )
        lam, g = _newton(problem, fy_trial[plastic], settings)

        for k in np.flatnonzero(np.abs(g) > settings.fy_tolerance):
            point = point_ids[plastic[k]] if point_ids is not None else str(plastic[k])
            ok = False
            if settings.bisection_fallback:
                logger.debug(f"Newton stalled for point {point} at sample {time_index}, bisecting")
                lam[k], g[k], ok = _bisect(problem, k, float(lam[k]), settings)
            if not ok:
                failed[plastic[k]] = True
                message = f"no convergence, |f_y|={abs(g[k]):.3e} MPa"
                failures.append(PointFailure(point, time_index, message))
                logger.warning(f"Point {point} failed at sample {time_index}: {message}")

        e_p[plastic] = state.e_p[plastic] + problem.flow * lam
        d_e_p = e_p[plastic] - state.e_p[plastic]
        d_p = np.abs(d_e_p) * problem.sigma / (3.0 * params.mu)
        x[plastic] = (state.x[plastic] + (2.0 / 3.0) * params.C * d_e_p) / (1.0 + params.D * d_p)
        p_hat[plastic] = state.p_hat[plastic] + d_p
        s[plastic] = _neuber_stress_ratio(e_p[plastic], direction, delta_f[plastic], state.s_o[plastic], state.e_p_o[plastic])

    e = state.e_o + (s - state.s_o) + (e_p - state.e_p_o)

    if negligible.any():
        s[negligible] = f_next
        e[negligible] = f_next

    new_state = StateArrays(
        s=s,
        e=e,
        e_p=e_p,
        p_hat=p_hat,
        x=x,
        s_o=state.s_o,
        e_o=state.e_o,
        e_p_o=state.e_p_o,
        f_o=state.f_o,
        f_y=yield_function(s, x, p_hat, sigma_vm_sharp, params),
        f=f_next,
        failed=failed,
    )
    return new_state, failures


def step(
    state: ScalarCorrectorState,
    f_prev: float,
    f_next: float,
    sigma_vm_sharp: float,
    params: MaterialParams,
    settings: Optional[SolverSettings] = None,
) -> ScalarCorrectorState:
    """
    One implicit step for a single point.

    Raises:
        ConvergenceError: If Newton and the bisection fallback both fail.
    """
    settings = settings or SolverSettings.for_material(params)
    arrays = StateArrays.from_state(state, f=f_prev)
    new_arrays, failures = advance(arrays, f_next, np.array([float(sigma_vm_sharp)]), params, settings)
    if failures:
        raise ConvergenceError(failures[0].message)
    return new_arrays.point(0)
