"""ActLayer and ActNet.

An ActLayer maps ``x in R^d`` to ``R^m`` through

    out_k = sum_i lam[k, i] * phi_k(x_i),    phi_k(t) = sum_j beta[k, j] * b_j(t)

i.e. the row sums of ``lam * (beta @ B(x))``. An ActNet scales its input by
``omega0``, projects it to width ``m``, applies ``L`` ActLayers and projects
to the output dimension.

All forward functions accept numpy arrays, tape variables or jets with a
trailing feature axis, so the same code serves plain evaluation, parameter
gradients and input derivatives.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .autodiff import jet as J
from .autodiff import tape as T
from .autodiff.fused import sin_basis_expansion
from .basis import EPS, SinBasis, eval_basis, eval_basis_jet
from .core import DimensionError


@dataclass(frozen=True)
class ArchSpec:
    d_in: int
    d_out: int
    m: int
    N: int
    L: int
    omega0: float = 1.0
    layer_bias: bool = True
    trainable_basis: bool = True
    init: str = "uniform"
    eps: float = EPS

    def __post_init__(self):
        for name in ("d_in", "d_out", "m", "N"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.L < 0:
            raise ValueError("L must be >= 0")
        if not self.omega0 > 0:
            raise ValueError("omega0 must be positive")
        if self.init not in ("uniform", "gaussian"):
            raise ValueError(f"init must be 'uniform' or 'gaussian', got {self.init!r}")

    def to_dict(self):
        return asdict(self)


@dataclass
class ActLayerParams:
    beta: np.ndarray   # (m, N)
    lam: np.ndarray    # (m, d)
    basis: SinBasis
    bias: np.ndarray | None = None  # (m,)

    @property
    def shape(self):
        """``(d, m, N)``."""
        m, d = self.lam.shape
        return d, m, self.beta.shape[1]


@dataclass
class ActNetParams:
    omega0: float
    in_w: np.ndarray    # (m, d_in)
    in_b: np.ndarray    # (m,)
    layers: list = field(default_factory=list)
    out_w: np.ndarray = None   # (d_out, m)
    out_b: np.ndarray = None   # (d_out,)


def _draw(rng, shape, std, dist):
    if dist == "gaussian":
        return rng.normal(0.0, std, size=shape)
    half = np.sqrt(3.0) * std
    return rng.uniform(-half, half, size=shape)


def init_actlayer(rng, d: int, m: int, N: int, *, bias=True, trainable=True, dist="uniform", eps=EPS) -> ActLayerParams:
    """beta ~ (0, 1/sqrt(N)), lam ~ (0, 1/sqrt(d)), omega ~ N(0, 1), phase = 0, bias = 0."""
    beta = _draw(rng, (m, N), 1.0 / np.sqrt(N), dist)
    lam = _draw(rng, (m, d), 1.0 / np.sqrt(d), dist)
    omega = rng.normal(0.0, 1.0, size=N)
    basis = SinBasis(omega, np.zeros(N), eps=eps, trainable=trainable)
    return ActLayerParams(beta, lam, basis, np.zeros(m) if bias else None)


def init_actnet(spec: ArchSpec, rng) -> ActNetParams:
    m = spec.m
    in_w = _draw(rng, (m, spec.d_in), 1.0 / np.sqrt(spec.d_in), spec.init)
    layers = [
        init_actlayer(rng, m, m, spec.N, bias=spec.layer_bias, trainable=spec.trainable_basis,
                      dist=spec.init, eps=spec.eps)
        for _ in range(spec.L)
    ]
    out_w = _draw(rng, (spec.d_out, m), 1.0 / np.sqrt(m), spec.init)
    return ActNetParams(spec.omega0, in_w, np.zeros(m), layers, out_w, np.zeros(spec.d_out))


def actlayer_forward(p: ActLayerParams, x):
    """ActLayer on inputs with a trailing axis of length ``d``.

    The basis normalization is folded into ``beta`` plus a constant shift, and
    ``beta``/``lam`` are merged into one ``(m, N*d)`` weight, so each call costs
    one sine per (basis, input) pair and a single matrix product.
    """
    m, d = np.shape(T.value_of(p.lam))
    if np.shape(T.value_of(J.value(x)))[-1:] != (d,):
        raise DimensionError(f"ActLayer expects inputs of length {d}, got shape {np.shape(T.value_of(J.value(x)))}")
    b = p.basis
    n = b.size
    mu_, sig = b.stats()
    beta_s = p.beta * (1.0 / (sig + b.eps))                                    # (m, N)
    w = T.reshape(T.reshape(beta_s, (m, n, 1)) * T.reshape(p.lam, (m, 1, d)), (m, n * d))
    s = sin_basis_expansion(x, b.omega, b.phase)                               # (..., N, d)
    out = J.merge_last2(s) @ T.transpose(w)                                   # (..., m)
    out = out - (beta_s @ mu_) * T.sum(p.lam, axis=1)
    if p.bias is not None:
        out = out + p.bias
    return out


def actlayer_forward_matrix(p: ActLayerParams, x) -> np.ndarray:
    """Single-point reference form ``S(lam * (beta @ B(x)))``."""
    from .core import hadamard, row_sums

    phi = T.value_of(p.beta) @ eval_basis(_plain_basis(p.basis), x)
    out = row_sums(hadamard(T.value_of(p.lam), phi))
    return out if p.bias is None else out + T.value_of(p.bias)


def actnet_forward(p: ActNetParams, x):
    h = x * p.omega0
    h = h @ T.transpose(p.in_w) + p.in_b
    for layer in p.layers:
        h = actlayer_forward(layer, h)
    return h @ T.transpose(p.out_w) + p.out_b


def _plain_basis(b: SinBasis) -> SinBasis:
    return SinBasis(T.value_of(b.omega), T.value_of(b.phase), eps=b.eps, trainable=False)


def actlayer_jacobian(p: ActLayerParams, x) -> np.ndarray:
    """Closed-form Jacobian ``lam * Phi'(x)`` with ``Phi'(x)[k, l] = phi_k'(x_l)``, shape ``(m, d)``."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    lam = T.value_of(p.lam)
    if x.size != lam.shape[1]:
        raise DimensionError(f"ActLayer expects inputs of length {lam.shape[1]}, got {x.size}")
    b = _plain_basis(p.basis)
    m, s = b.stats()
    inv = 1.0 / (s + b.eps)
    # b_j'(t) = omega_j cos(omega_j t + p_j) / (sigma_j + eps)
    dB = b.omega[:, None] * np.cos(b.omega[:, None] * x[None, :] + b.phase[:, None]) * inv[:, None]
    return lam * (T.value_of(p.beta) @ dB)


def actlayer_jacobian_column(p: ActLayerParams, x, l: int) -> np.ndarray:
    """Column ``l`` of the Jacobian via the basis derivative table."""
    dB = eval_basis_jet(_plain_basis(p.basis), x, l, 1)[1]
    return T.value_of(p.lam)[:, l] * (T.value_of(p.beta) @ dB[:, l])


# parameter bookkeeping ------------------------------------------------------

def layout(spec: ArchSpec):
    """Flat-vector layout as ``(name, shape, kind)``; kind is 'matrix', 'vector' or 'basis'."""
    m, N = spec.m, spec.N
    items = [("in_w", (m, spec.d_in), "matrix"), ("in_b", (m,), "vector")]
    for i in range(spec.L):
        items += [
            (f"layers.{i}.beta", (m, N), "matrix"),
            (f"layers.{i}.lam", (m, m), "matrix"),
            (f"layers.{i}.omega", (N,), "basis"),
            (f"layers.{i}.phase", (N,), "basis"),
        ]
        if spec.layer_bias:
            items.append((f"layers.{i}.bias", (m,), "vector"))
    items += [("out_w", (spec.d_out, m), "matrix"), ("out_b", (spec.d_out,), "vector")]
    return items


def param_count(spec: ArchSpec) -> int:
    """``L (mN + m^2 + m*bias + 2N) + (m d_in + m) + (d_out m + d_out)``."""
    m, N = spec.m, spec.N
    per_layer = m * N + m * m + 2 * N + (m if spec.layer_bias else 0)
    return spec.L * per_layer + (m * spec.d_in + m) + (spec.d_out * m + spec.d_out)


def flop_estimate(spec: ArchSpec) -> int:
    """Multiply-add count of one forward pass of a single point.

    input scaling d_in; input projection m d_in + m; per layer (d = m):
    basis arguments and sines 2 d N, contraction with lam d N m,
    beta-weighted reduction N m, shift and bias 2 m; output projection
    d_out m + d_out. Leading term ``L m^2 N``.
    """
    m, N = spec.m, spec.N
    per_layer = m * m * N + 2 * m * N + m * N + (2 if spec.layer_bias else 1) * m
    return spec.d_in + (m * spec.d_in + m) + spec.L * per_layer + (spec.d_out * m + spec.d_out)


def flatten_params(p: ActNetParams) -> np.ndarray:
    parts = [p.in_w, p.in_b]
    for layer in p.layers:
        parts += [layer.beta, layer.lam, layer.basis.omega, layer.basis.phase]
        if layer.bias is not None:
            parts.append(layer.bias)
    parts += [p.out_w, p.out_b]
    return np.concatenate([np.ravel(T.value_of(a)) for a in parts])


class FormatError(ValueError):
    """A flat parameter vector does not match its architecture."""


def unflatten_params(spec: ArchSpec, v) -> ActNetParams:
    """Inverse of :func:`flatten_params`; ``v`` may be a tape variable."""
    n = param_count(spec)
    if np.shape(T.value_of(v)) != (n,):
        raise FormatError(f"expected a flat vector of length {n}, got shape {np.shape(T.value_of(v))}")
    tensors = {}
    pos = 0
    for name, shape, kind in layout(spec):
        size = int(np.prod(shape))
        chunk = T.reshape(T.getitem(v, slice(pos, pos + size)), shape)
        if kind == "basis" and not spec.trainable_basis:
            chunk = T.value_of(chunk)
        tensors[name] = chunk
        pos += size
    layers = []
    for i in range(spec.L):
        basis = SinBasis(tensors[f"layers.{i}.omega"], tensors[f"layers.{i}.phase"],
                         eps=spec.eps, trainable=spec.trainable_basis)
        layers.append(ActLayerParams(tensors[f"layers.{i}.beta"], tensors[f"layers.{i}.lam"], basis,
                                     tensors.get(f"layers.{i}.bias")))
    return ActNetParams(spec.omega0, tensors["in_w"], tensors["in_b"], layers, tensors["out_w"], tensors["out_b"])


class ActNet:
    """Architecture handle used by the trainer: flat parameters in, outputs out."""

    family = "actnet"

    def __init__(self, spec: ArchSpec):
        self.spec = spec
        self.n_params = param_count(spec)
        self.layout = layout(spec)

    @property
    def d_in(self):
        return self.spec.d_in

    def init(self, rng) -> np.ndarray:
        return flatten_params(init_actnet(self.spec, rng))

    def params(self, theta) -> ActNetParams:
        return unflatten_params(self.spec, theta)

    def apply(self, theta, x):
        return actnet_forward(self.params(theta), x)

    def frozen_mask(self) -> np.ndarray:
        """True at flat positions that the optimizer must not move."""
        mask = np.zeros(self.n_params, dtype=bool)
        if not self.spec.trainable_basis:
            pos = 0
            for _, shape, kind in self.layout:
                size = int(np.prod(shape))
                if kind == "basis":
                    mask[pos:pos + size] = True
                pos += size
        return mask

    def describe(self) -> dict:
        return {"family": self.family, **self.spec.to_dict()}
