"""Sequential training over equal time windows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .losses import model_field
from .problems import FourierIC


@dataclass
class WindowResult:
    problem: object
    theta: np.ndarray
    result: object = None


def window_bounds(t_start: float, t_end: float, n_windows: int):
    if n_windows < 1:
        raise ValueError("n_windows must be >= 1")
    edges = np.linspace(t_start, t_end, n_windows + 1)
    edges[-1] = t_end
    return list(zip(edges[:-1], edges[1:]))


def handoff(problem, model, theta, n_grid: int = 256) -> FourierIC:
    """Initial condition for the next window: the trained field at ``t1``.

    The field is sampled on ``x_j = 2 pi j / n_grid`` and replaced by its
    trigonometric interpolant, which matches the samples up to rounding.
    """
    x = 2.0 * np.pi * np.arange(n_grid) / n_grid
    X = np.stack([np.full(n_grid, problem.t1), x], axis=-1)
    return FourierIC.from_samples(model_field(problem, model, theta)(X))


def window_march(problem, n_windows: int, train_window, t_end: float | None = None, n_grid: int = 256):
    """Train ``n_windows`` consecutive windows of ``problem``.

    ``problem`` describes the first window and must provide
    ``window(t0, t1, initial)``. ``train_window(k, window_problem)`` returns
    ``(model, theta, result)``; the next window starts from the interpolated
    end state of the previous one.
    """
    span = problem.t1 - problem.t0
    t_end = problem.t0 + n_windows * span if t_end is None else t_end
    out = []
    initial = problem.initial
    for k, (t0, t1) in enumerate(window_bounds(problem.t0, t_end, n_windows)):
        wp = problem.window(t0, t1, initial)
        model, theta, result = train_window(k, wp)
        out.append(WindowResult(wp, np.asarray(theta), result))
        initial = handoff(wp, model, theta, n_grid)
    return out
