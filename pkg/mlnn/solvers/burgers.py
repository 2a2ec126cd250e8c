"""
Steady viscous Burgers equation

    u u' - u''/Re = 0 on [0, 1],  u(0) = 0,  u(1) = 1

Central differences give the nonlinear rows

    F_j = (u_{j+1}**2 - u_{j-1}**2) / (4 dx) - (u_{j+1} - 2 u_j + u_{j-1}) / (Re dx**2)

which are solved by Newton iteration with the analytic tridiagonal Jacobian.
Newton stops once max|F| reaches the tolerance, or the rounding floor of the
rows when the tolerance lies below it. When Newton from the linear ramp
fails, the solve falls back to continuation in Re.
"""

from typing import List, Optional

import numpy as np

from ..constants import (
    BURGERS_MIN_POINTS_PER_RE,
    NEWTON_MAX_HALVINGS,
    NEWTON_MAX_ITER,
    NEWTON_ROUNDOFF_FACTOR,
    NEWTON_TOL,
)
from ..utils.exceptions import ConvergenceError, ValidationError
from ..utils.logging import get_logger
from .base import Solution, solve_tridiagonal

logger = get_logger(__name__)

CONTINUATION_STEPS = 8


def check_burgers_grid(re: float, n: int) -> None:
    """Raise ValidationError unless the grid resolves the Reynolds number."""
    if re <= 0:
        raise ValidationError(f"Reynolds number must be positive, got {re}")
    if n < 2:
        raise ValidationError(f"Need at least 2 intervals, got {n}")
    if n < BURGERS_MIN_POINTS_PER_RE * re:
        raise ValidationError(
            f"N={n} is too coarse for Re={re}; need N >= {BURGERS_MIN_POINTS_PER_RE}*Re",
            {"re": re, "n": n},
        )


def burgers_residual(u: np.ndarray, re: float) -> np.ndarray:
    """Interior residual rows F_j of a full-grid field."""
    dx = 1.0 / (len(u) - 1)
    left, mid, right = u[:-2], u[1:-1], u[2:]
    return (right * right - left * left) / (4.0 * dx) - (right - 2.0 * mid + left) / (
        re * dx * dx
    )


def roundoff_floor(u: np.ndarray, re: float) -> float:
    """Smallest max|F| that float64 evaluation of the rows can resolve at u."""
    dx = 1.0 / (len(u) - 1)
    a = np.abs(u)
    left, mid, right = a[:-2], a[1:-1], a[2:]
    scale = (right * right + left * left) / (4.0 * dx) + (right + 2.0 * mid + left) / (
        re * dx * dx
    )
    return float(NEWTON_ROUNDOFF_FACTOR * np.finfo(np.float64).eps * np.max(scale))


def _jacobian(u: np.ndarray, re: float):
    dx = 1.0 / (len(u) - 1)
    diffusion = 1.0 / (re * dx * dx)
    lower = -u[:-2] / (2.0 * dx) - diffusion
    diag = np.full(len(u) - 2, 2.0 * diffusion)
    upper = u[2:] / (2.0 * dx) - diffusion
    return lower, diag, upper


def _newton(re: float, guess: np.ndarray, tol: float, max_iter: int) -> Solution:
    u = guess.copy()
    u[0], u[-1] = 0.0, 1.0
    n = len(u) - 1
    g = burgers_residual(u, re)
    norm = float(np.max(np.abs(g)))
    history: List[float] = [norm]
    iterations = 0
    while norm > tol:
        floor = roundoff_floor(u, re)
        if norm <= floor:
            logger.debug(
                f"Newton Re={re:g} N={n}: |F|={norm:.3e} is at the rounding floor "
                f"{floor:.3e}, above tol {tol:.1e}"
            )
            break
        if iterations == max_iter or not np.isfinite(norm):
            raise ConvergenceError(
                f"Newton did not converge for Re={re:g} on N={n}",
                norm,
                iterations,
                {"re": re, "n": n, "residual_history": history},
            )
        lower, diag, upper = _jacobian(u, re)
        step = solve_tridiagonal(lower, diag, upper, -g)
        scale = 1.0
        for _ in range(NEWTON_MAX_HALVINGS):
            trial = u.copy()
            trial[1:-1] += scale * step
            g = burgers_residual(trial, re)
            trial_norm = float(np.max(np.abs(g)))
            if trial_norm < norm:
                break
            scale /= 2.0
        u, norm = trial, trial_norm
        iterations += 1
        history.append(norm)
        logger.debug(f"Newton Re={re:g} iter {iterations}: |F|={norm:.3e} step={scale:g}")
    return Solution(u, iterations, history)


def newton_burgers(
    re: float,
    n: int,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
    guess: Optional[np.ndarray] = None,
) -> Solution:
    """
    Solve the discrete Burgers problem.

    Args:
        re: Reynolds number
        n: Interval count
        tol: Max-norm tolerance on F
        max_iter: Newton iteration cap per solve
        guess: Initial field; the linear ramp u_j = x_j when omitted

    Returns:
        Solution with the Newton residual history

    Raises:
        ValidationError: If the grid is too coarse for re
        ConvergenceError: If neither Newton nor continuation converge
    """
    check_burgers_grid(re, n)
    ramp = np.arange(n + 1) / n
    try:
        return _newton(re, ramp if guess is None else guess, tol, max_iter)
    except ConvergenceError as first:
        logger.warning(
            f"Newton from the ramp failed for Re={re:g} (|F|={first.residual:.3e}); "
            f"trying continuation in Re"
        )
        failure = first
    values = ramp
    total_iterations = 0
    history: List[float] = []
    for k in range(CONTINUATION_STEPS, -1, -1):
        stage_re = re / 2.0**k
        try:
            stage = _newton(stage_re, values, tol, max_iter)
        except ConvergenceError as e:
            raise ConvergenceError(
                f"Continuation failed at Re={stage_re:g} for target Re={re:g}",
                e.residual,
                total_iterations + e.iterations,
                {"re": re, "n": n, "first_attempt": failure.details},
            ) from e
        values = stage.values
        total_iterations += stage.iterations
        history.extend(stage.residual_history)
    return Solution(values, total_iterations, history, CONTINUATION_STEPS)


def solve_burgers(
    re: float, n: int, tol: float = NEWTON_TOL, max_iter: int = NEWTON_MAX_ITER
) -> np.ndarray:
    """Solution vector of length n + 1 with u[0] = 0 and u[n] = 1."""
    return newton_burgers(re, n, tol, max_iter).values
