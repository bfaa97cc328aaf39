"""Dense helpers and seeded random sampling shared by every other module.

Matrices are plain 2-D ``float64`` numpy arrays in row-major (C) order.
Random streams use numpy's Philox4x64 counter-based generator, which is
bit-reproducible across platforms for a given seed and call sequence.
"""

from __future__ import annotations

import numpy as np

DTYPE = np.float64


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


def as_matrix(a) -> np.ndarray:
    m = np.ascontiguousarray(a, dtype=DTYPE)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def hadamard(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=DTYPE)
    b = np.asarray(b, dtype=DTYPE)
    if a.shape != b.shape:
        raise DimensionError(f"hadamard: shape mismatch {a.shape} vs {b.shape}")
    return a * b


def row_sums(a):
    """Row sums of a matrix; the plain sum when given a vector."""
    a = np.asarray(a, dtype=DTYPE)
    if a.size == 0:
        raise DimensionError("row_sums of an empty array")
    if a.ndim == 1:
        return float(a.sum())
    if a.ndim != 2:
        raise DimensionError(f"row_sums expects a vector or matrix, got shape {a.shape}")
    return a.sum(axis=1)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox-backed generator; ``stream`` separates independent uses of one seed."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def sample_normal(rng: np.random.Generator, n: int, mean: float = 0.0, std: float = 1.0) -> np.ndarray:
    if std < 0:
        raise ValueError(f"std must be >= 0, got {std}")
    if std == 0:
        return np.full(n, float(mean), dtype=DTYPE)
    return rng.normal(mean, std, size=n)


def sample_uniform_box(rng: np.random.Generator, n: int, lo, hi) -> np.ndarray:
    """``n`` points uniform in the box ``[lo, hi]``, shape ``(n, len(lo))``."""
    lo = np.asarray(lo, dtype=DTYPE).reshape(-1)
    hi = np.asarray(hi, dtype=DTYPE).reshape(-1)
    if lo.shape != hi.shape:
        raise DimensionError(f"box bounds differ in length: {lo.shape} vs {hi.shape}")
    if np.any(lo > hi):
        raise ValueError(f"lower bound exceeds upper bound: lo={lo}, hi={hi}")
    u = rng.random((n, lo.size))
    return lo + u * (hi - lo)
