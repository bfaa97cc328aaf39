"""Normalized sinusoidal basis ``b(t) = (sin(w t + p) - mu) / (sigma + eps)``.

``mu`` and ``sigma`` are the exact mean and standard deviation of
``sin(w X + p)`` for ``X ~ N(0, 1)``, so each basis function is standardized
for standard-normal inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import tape as T

EPS = 1e-4


def mu(omega, phase):
    """E[sin(omega X + phase)] for X ~ N(0, 1)."""
    return T.exp(-0.5 * T.square(omega)) * T.sin(phase)


def sigma(omega, phase):
    """Std of sin(omega X + phase).

    The variance ``1/2 - exp(-2 w^2) cos(2p) / 2 - mu^2`` is evaluated as
    ``E^2/2 - exp(-w^2) E cos(p)^2`` with ``E = expm1(-w^2) <= 0``. Both terms
    are nonnegative, so the result stays accurate where the textbook form
    cancels (w near 0, or p near +-pi/2). A radicand pushed below 0 by
    rounding clamps to 0.
    """
    a = T.square(omega)
    e = T.expm1(-a)
    c = T.cos(phase)
    radicand = 0.5 * T.square(e) - T.exp(-a) * e * T.square(c)
    return T.sqrt(T.maximum(radicand, 0.0))


@dataclass
class SinBasis:
    omega: np.ndarray
    phase: np.ndarray
    eps: float = EPS
    trainable: bool = True
    _stats: tuple | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        # tape variables pass through untouched so (omega, phase) can be differentiated
        if not isinstance(self.omega, T.Var):
            self.omega = np.atleast_1d(np.asarray(self.omega, dtype=np.float64))
        if not isinstance(self.phase, T.Var):
            self.phase = np.atleast_1d(np.asarray(self.phase, dtype=np.float64))
        if self.omega.shape != self.phase.shape or len(self.omega.shape) != 1 or self.omega.size < 1:
            raise ValueError("omega and phase must be non-empty vectors of equal length")
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    @property
    def size(self) -> int:
        return self.omega.size

    def stats(self):
        """``(mu, sigma)`` per basis function; cached unless the basis is trainable."""
        if self.trainable or self._stats is None:
            st = (mu(self.omega, self.phase), sigma(self.omega, self.phase))
            if self.trainable:
                return st
            self._stats = st
        return self._stats


def eval_basis(b: SinBasis, x) -> np.ndarray:
    """``B[i, j] = b_i(x_j)``, shape ``(N, d)``."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    m, s = (T.value_of(v) for v in b.stats())
    arg = b.omega[:, None] * x[None, :] + b.phase[:, None]
    return (np.sin(arg) - m[:, None]) / (s[:, None] + b.eps)


def eval_basis_jet(b: SinBasis, x, coord: int, order: int) -> np.ndarray:
    """Derivatives ``d^k/dx_coord^k B(x)`` for ``k = 0..order``, shape ``(order+1, N, d)``.

    Only column ``coord`` depends on ``x_coord``; the other columns are zero
    for ``k >= 1``.
    """
    if not 0 <= order <= 4:
        raise ValueError(f"order must be in 0..4, got {order}")
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if not 0 <= coord < x.size:
        raise IndexError(f"coord {coord} out of range for input of length {x.size}")
    out = np.zeros((order + 1, b.size, x.size))
    out[0] = eval_basis(b, x)
    s = T.value_of(b.stats()[1])
    inv = 1.0 / (s + b.eps)
    arg = b.omega * x[coord] + b.phase
    sn, cs = np.sin(arg), np.cos(arg)
    cycle = (sn, cs, -sn, -cs)
    for k in range(1, order + 1):
        out[k, :, coord] = b.omega ** k * cycle[k % 4] * inv
    return out
