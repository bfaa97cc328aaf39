"""Sine-activated MLP baseline (Siren).

Layer ``i`` computes ``sin(h @ W_i.T + b_i)`` except the last, which is
affine. The input is scaled by ``omega0`` before the first layer, which is the
usual Siren parametrization ``sin(omega0 * W_1 x + b)`` with the first-layer
frequency folded into the input scaling.

Initialization follows the reference scheme: first-layer weights
``U(-1/n, 1/n)``, later weights ``U(-sqrt(6/n), sqrt(6/n))`` with ``n`` the
fan-in; biases start at zero.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .autodiff import jet as J
from .autodiff import tape as T
from .network import FormatError


@dataclass(frozen=True)
class SirenSpec:
    widths: tuple
    omega0: float = 30.0

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        if len(self.widths) < 2:
            raise ValueError("widths needs at least an input and an output size")
        if min(self.widths) < 1:
            raise ValueError("all widths must be >= 1")
        if not self.omega0 > 0:
            raise ValueError("omega0 must be positive")

    @property
    def d_in(self):
        return self.widths[0]

    @property
    def d_out(self):
        return self.widths[-1]

    def to_dict(self):
        d = asdict(self)
        d["widths"] = list(self.widths)
        return d


def siren_layout(spec: SirenSpec):
    items = []
    for i, (a, b) in enumerate(zip(spec.widths[:-1], spec.widths[1:])):
        items += [(f"layers.{i}.w", (b, a), "matrix"), (f"layers.{i}.b", (b,), "vector")]
    return items


def siren_param_count(spec: SirenSpec) -> int:
    """``sum (fan_in + 1) * fan_out`` over layers."""
    return sum((a + 1) * b for a, b in zip(spec.widths[:-1], spec.widths[1:]))


def init_siren(spec: SirenSpec, rng) -> list:
    """List of ``(W, b)`` pairs."""
    params = []
    for i, (a, b) in enumerate(zip(spec.widths[:-1], spec.widths[1:])):
        bound = 1.0 / a if i == 0 else np.sqrt(6.0 / a)
        params.append((rng.uniform(-bound, bound, size=(b, a)), np.zeros(b)))
    return params


def siren_forward(spec: SirenSpec, params, x):
    """Works on arrays, tape variables and jets with a trailing feature axis."""
    h = x * spec.omega0
    last = len(params) - 1
    for i, (w, b) in enumerate(params):
        h = h @ T.transpose(w) + b
        if i < last:
            h = J.sin(h)
    return h


class Siren:
    family = "siren"

    def __init__(self, spec: SirenSpec):
        self.spec = spec
        self.layout = siren_layout(spec)
        self.n_params = siren_param_count(spec)

    @property
    def d_in(self):
        return self.spec.d_in

    def init(self, rng) -> np.ndarray:
        return np.concatenate([np.concatenate([w.ravel(), b]) for w, b in init_siren(self.spec, rng)])

    def params(self, theta):
        if np.shape(T.value_of(theta)) != (self.n_params,):
            raise FormatError(f"expected a flat vector of length {self.n_params}, "
                              f"got shape {np.shape(T.value_of(theta))}")
        out, pos = [], 0
        chunks = []
        for _, shape, _ in self.layout:
            size = int(np.prod(shape))
            chunks.append(T.reshape(T.getitem(theta, slice(pos, pos + size)), shape))
            pos += size
        for i in range(0, len(chunks), 2):
            out.append((chunks[i], chunks[i + 1]))
        return out

    def apply(self, theta, x):
        return siren_forward(self.spec, self.params(theta), x)

    def frozen_mask(self) -> np.ndarray:
        return np.zeros(self.n_params, dtype=bool)

    def describe(self) -> dict:
        return {"family": self.family, **self.spec.to_dict()}
