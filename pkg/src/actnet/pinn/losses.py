"""Residual losses, causal weighting and error metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..autodiff import tape as T
from ..autodiff.tape import CapabilityError

DEFAULT_EPSILONS = (1e-1, 1e0, 1e1, 1e2, 1e3, 1e3, 1e3, 1e4, 1e4, 1e4)


@dataclass
class CausalSchedule:
    """Piecewise-constant causality parameter.

    ``epsilons[i]`` is active for steps ``[i * steps_per_phase, (i+1) * steps_per_phase)``;
    the last value stays active afterwards.
    """

    epsilons: tuple = field(default=DEFAULT_EPSILONS)
    steps_per_phase: int = 10_000
    n_bins: int = 32

    def __post_init__(self):
        self.epsilons = tuple(float(e) for e in self.epsilons)
        if not self.epsilons:
            raise ValueError("causal schedule needs at least one epsilon")
        if any(not e > 0 for e in self.epsilons):
            raise ValueError("causal epsilons must be positive")
        if self.steps_per_phase < 1 or self.n_bins < 1:
            raise ValueError("steps_per_phase and n_bins must be >= 1")

    def epsilon_at(self, step: int) -> float:
        return self.epsilons[min(step // self.steps_per_phase, len(self.epsilons) - 1)]


def causal_weights(bin_losses, eps: float) -> np.ndarray:
    """``w_i = exp(-eps * sum_{j<i} L_j)`` for time-ordered bin losses."""
    L = np.asarray(bin_losses, dtype=np.float64)
    acc = np.concatenate([[0.0], np.cumsum(L)[:-1]])
    return np.exp(-eps * acc)


def time_bins(t, t0: float, t1: float, n_bins: int) -> np.ndarray:
    """Bin index of each time in ``[t0, t1]`` for ``n_bins`` equal bins."""
    idx = np.floor((np.asarray(t) - t0) / (t1 - t0) * n_bins).astype(np.int64)
    return np.clip(idx, 0, n_bins - 1)


def residual_loss(problem, model, theta, X, causal_eps: float | None = None, n_bins: int = 32):
    """Mean squared residual, optionally with causal weights over time bins.

    With causal weighting the loss is ``mean_i w_i * L_i`` where ``L_i`` is the
    mean squared residual of the points in time bin ``i`` and ``w_i`` is
    computed from the current bin losses without being differentiated.
    Empty bins are skipped.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("residual_loss needs a non-empty (n, dim) batch")
    r = problem.residual(model, theta, X)
    r2 = r * r
    if causal_eps is None:
        return T.mean(r2)
    if problem.time_axis is None:
        raise CapabilityError(f"problem {problem.name!r} has no time axis for causal weighting")
    lo, hi = problem.lo[problem.time_axis], problem.hi[problem.time_axis]
    idx = time_bins(X[:, problem.time_axis], lo, hi, n_bins)
    counts = np.bincount(idx, minlength=n_bins)
    used = np.flatnonzero(counts)
    A = np.zeros((used.size, X.shape[0]))
    pos = np.searchsorted(used, idx)
    A[pos, np.arange(X.shape[0])] = 1.0 / counts[idx]
    bin_losses = T.matmul(A, r2)
    w = causal_weights(T.value_of(bin_losses), causal_eps)
    return T.sum(bin_losses * w) * (1.0 / used.size)


def relative_l2(problem, u_fn, grid=None) -> float:
    """``||u - u*||_2 / ||u*||_2`` on the problem's evaluation grid.

    ``u_fn`` maps an ``(n, dim)`` array of points to ``n`` values.
    """
    if not problem.has_exact:
        raise CapabilityError(f"problem {problem.name!r} has no closed-form solution")
    X = problem.eval_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    ref = problem.exact(X)
    u = np.asarray(u_fn(X), dtype=np.float64).reshape(ref.shape)
    return float(np.linalg.norm(u - ref) / np.linalg.norm(ref))


def model_field(problem, model, theta, chunk: int = 8192):
    """Callable evaluating the constrained solution of ``model`` in chunks."""
    theta = np.asarray(theta, dtype=np.float64)

    def u_fn(X):
        X = np.asarray(X, dtype=np.float64)
        parts = [problem.solution(model, theta, X[i:i + chunk]) for i in range(0, len(X), chunk)]
        return np.concatenate(parts) if parts else np.zeros(0)

    return u_fn
