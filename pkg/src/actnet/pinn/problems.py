"""PDE problems with exactly enforced boundary and initial conditions.

Every problem exposes the same surface:

* ``lo``/``hi``: the box of input coordinates, in network-input order;
* ``solution(model, theta, X, directions, order)``: the constrained field as a
  jet seeded along ``directions`` (or a plain array when ``order == 0``);
* ``derivatives(model, theta, X)``: a dict of the derivatives the residual needs;
* ``residual_from(d, X)``: the residual given such a dict, so analytic
  derivatives of an exact solution can be checked through the same code;
* ``constraint_points(rng, n)``: points on the constrained set together with
  the values the solution must take there.

Time-dependent problems order their coordinates as ``(t, x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from ..autodiff import jet as J
from ..autodiff import tape as T
from ..autodiff.tape import CapabilityError

PI = np.pi


def _coeff(u, direction: int, k: int):
    """``d^k u / ds^k`` along seeded direction ``direction``."""
    c = u.taylor[k]
    c = T.getitem(c, direction)
    return c * float(factorial(k)) if k > 1 else c


class PdeProblem:
    name = "problem"
    coords: tuple = ()
    time_axis: int | None = None
    # (direction list, order) used when seeding jets for the residual
    seed_directions: tuple = ()
    seed_order = 0

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def input_dim(self) -> int:
        """Number of network inputs after embedding."""
        return self.dim

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"name": self.name, **self.params()}

    # network plumbing -----------------------------------------------------

    def embed(self, Xj):
        """Map coordinates (array or jet) to network inputs."""
        return Xj

    def ansatz(self, raw, Xj):
        """Constrained field from the raw scalar network output."""
        return raw

    def solution(self, model, theta, X, directions=(), order: int = 0):
        X = np.asarray(X, dtype=np.float64)
        Xj = J.seed(X, directions, order) if order > 0 else X
        out = model.apply(theta, self.embed(Xj))
        raw = out[..., 0]
        return self.ansatz(raw, Xj)

    def derivatives(self, model, theta, X) -> dict:
        raise NotImplementedError

    def residual_from(self, d: dict, X):
        raise NotImplementedError

    def residual(self, model, theta, X):
        return self.residual_from(self.derivatives(model, theta, X), X)

    # sampling and reference data -----------------------------------------

    def sample(self, rng, n: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))

    def exact(self, X):
        raise CapabilityError(f"problem {self.name!r} has no closed-form solution")

    @property
    def has_exact(self) -> bool:
        return type(self).exact is not PdeProblem.exact

    def exact_derivatives(self, X) -> dict:
        raise CapabilityError(f"problem {self.name!r} has no closed-form solution")

    def eval_grid(self, n=None) -> np.ndarray:
        """Uniform evaluation grid including the box edges."""
        if n is None:
            n = (256, 256) if self.time_axis is None else (100, 256)
        axes = [np.linspace(a, b, k) for a, b, k in zip(self.lo, self.hi, n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def constraint_points(self, rng, n: int):
        raise NotImplementedError


# --------------------------------------------------------------------------
# steady problems on [-1, 1]^2

class _SquareProblem(PdeProblem):
    coords = ("x", "y")
    seed_directions = (0, 1)
    seed_order = 2

    def __init__(self, w: int):
        if w < 1:
            raise ValueError("w must be >= 1")
        super().__init__([-1.0, -1.0], [1.0, 1.0])
        self.w = w

    def ansatz(self, raw, Xj):
        x, y = Xj[..., 0], Xj[..., 1]
        return (1.0 - x * x) * (1.0 - y * y) * raw

    def derivatives(self, model, theta, X):
        u = self.solution(model, theta, X, self.seed_directions, self.seed_order)
        return {"u": u.taylor[0], "u_xx": _coeff(u, 0, 2), "u_yy": _coeff(u, 1, 2)}

    def exact(self, X):
        X = np.asarray(X)
        a = PI * self.w
        return np.sin(a * X[..., 0]) * np.sin(a * X[..., 1])

    def exact_derivatives(self, X):
        u = self.exact(X)
        a2 = (PI * self.w) ** 2
        return {"u": u, "u_xx": -a2 * u, "u_yy": -a2 * u}

    def sin_sin(self, X):
        return self.exact(X)

    def constraint_points(self, rng, n):
        t = rng.uniform(-1.0, 1.0, size=n)
        side = rng.integers(0, 4, size=n)
        X = np.empty((n, 2))
        X[:, 0] = np.where(side < 2, np.where(side == 0, -1.0, 1.0), t)
        X[:, 1] = np.where(side < 2, t, np.where(side == 2, -1.0, 1.0))
        return X, np.zeros(n)


class Poisson(_SquareProblem):
    """``u_xx + u_yy = f`` with ``f = -2 pi^2 w^2 sin(pi w x) sin(pi w y)``."""

    name = "poisson"

    def params(self):
        return {"w": self.w}

    def forcing(self, X):
        return -2.0 * (PI * self.w) ** 2 * self.sin_sin(X)

    def residual_from(self, d, X):
        return d["u_xx"] + d["u_yy"] - self.forcing(X)


class Helmholtz(_SquareProblem):
    """``u_xx + u_yy + kappa^2 u = f`` with ``f = (kappa^2 - 2 pi^2 w^2) sin(pi w x) sin(pi w y)``."""

    name = "helmholtz"

    def __init__(self, w: int, kappa: float = 1.0):
        super().__init__(w)
        self.kappa = float(kappa)

    def params(self):
        return {"w": self.w, "kappa": self.kappa}

    def forcing(self, X):
        return (self.kappa ** 2 - 2.0 * (PI * self.w) ** 2) * self.sin_sin(X)

    def residual_from(self, d, X):
        return d["u_xx"] + d["u_yy"] + self.kappa ** 2 * d["u"] - self.forcing(X)


# --------------------------------------------------------------------------
# time-dependent problems

class AllenCahn(PdeProblem):
    """``u_t - D u_xx + 5 (u^3 - u) = 0`` on ``[0, 1] x [-1, 1]``.

    The ansatz ``(1 - t) x^2 cos(pi x) + t ((1 - x^2) u_raw - 1)`` pins
    ``u(0, x) = x^2 cos(pi x)`` and ``u(t, +-1) = -1``.
    """

    name = "allen_cahn"
    coords = ("t", "x")
    time_axis = 0
    seed_directions = (0, 1)
    seed_order = 2

    def __init__(self, D: float = 1e-4):
        if not D > 0:
            raise ValueError("D must be positive")
        super().__init__([0.0, -1.0], [1.0, 1.0])
        self.D = float(D)

    def params(self):
        return {"D": self.D}

    def ansatz(self, raw, Xj):
        t, x = Xj[..., 0], Xj[..., 1]
        return (1.0 - t) * (x * x * J.cos(PI * x)) + t * ((1.0 - x * x) * raw - 1.0)

    def derivatives(self, model, theta, X):
        u = self.solution(model, theta, X, self.seed_directions, self.seed_order)
        return {"u": u.taylor[0], "u_t": _coeff(u, 0, 1), "u_xx": _coeff(u, 1, 2)}

    def residual_from(self, d, X):
        u = d["u"]
        return d["u_t"] - self.D * d["u_xx"] + 5.0 * (u * u * u - u)

    def constraint_points(self, rng, n):
        k = n // 2
        Xa = np.stack([np.zeros(k), rng.uniform(-1.0, 1.0, size=k)], axis=-1)
        side = np.where(rng.integers(0, 2, size=n - k) == 0, -1.0, 1.0)
        Xb = np.stack([rng.uniform(0.0, 1.0, size=n - k), side], axis=-1)
        target = np.concatenate([Xa[:, 1] ** 2 * np.cos(PI * Xa[:, 1]), -np.ones(n - k)])
        return np.concatenate([Xa, Xb]), target


@dataclass
class FourierIC:
    """Real trigonometric polynomial ``a_0 + sum_k a_k cos(kx) + b_k sin(kx)``.

    ``a[k]`` and ``b[k]`` hold the coefficients of frequency ``k`` (``b[0]`` is
    ignored). Used as the initial condition of periodic problems, which lets
    the jet of ``g`` be computed from exact derivatives.
    """

    a: np.ndarray
    b: np.ndarray = field(default=None)

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=np.float64)
        self.b = np.zeros_like(self.a) if self.b is None else np.asarray(self.b, dtype=np.float64)
        if self.a.shape != self.b.shape or self.a.ndim != 1:
            raise ValueError("a and b must be vectors of equal length")

    @classmethod
    def from_samples(cls, values) -> "FourierIC":
        """Trigonometric interpolant through ``values`` at ``x_j = 2 pi j / M``."""
        v = np.asarray(values, dtype=np.float64)
        M = v.size
        F = np.fft.rfft(v) / M
        a = 2.0 * F.real
        b = -2.0 * F.imag
        a[0] = F[0].real
        if M % 2 == 0:
            a[-1] = F[-1].real
            b[-1] = 0.0
        return cls(a, b)

    def derivative(self, x, r: int):
        """``d^r g / dx^r`` at ``x``."""
        x = np.asarray(x, dtype=np.float64)
        k = np.arange(self.a.size, dtype=np.float64)
        arg = np.multiply.outer(x, k)
        c, s = np.cos(arg), np.sin(arg)
        # d^r/dx^r of (a cos kx + b sin kx): rotate (a, b) by r quarter turns
        ar, br = self.a, self.b
        for _ in range(r % 4):
            ar, br = br, -ar
        kr = k ** r
        return c @ (kr * ar) + s @ (kr * br)

    def __call__(self, x):
        return self.derivative(x, 0)

    def jet(self, xj):
        """Jet of ``g(x)`` for a jet ``x`` that is affine in the seed parameter."""
        if not isinstance(xj, J.Jet):
            return self(xj)
        x0 = T.value_of(xj.taylor[0])
        v = np.asarray(T.value_of(xj.taylor[1])) if xj.order >= 1 else None
        for c in xj.taylor[2:]:
            if np.any(np.asarray(T.value_of(c)) != 0.0):
                raise CapabilityError("FourierIC.jet expects a coordinate jet that is affine in the seed")
        out = [self(x0)]
        for k in range(1, xj.order + 1):
            out.append(self.derivative(x0, k) * v ** k / factorial(k))
        return J.Jet(out)


class _PeriodicProblem(PdeProblem):
    """Problems on ``[t0, t1] x [0, 2 pi]`` with periodic ``x`` and ansatz ``g(x) + (t - t0) u_raw``."""

    coords = ("t", "x")
    time_axis = 0

    def __init__(self, t0: float, t1: float, initial: FourierIC):
        if not t1 > t0:
            raise ValueError("window must satisfy t1 > t0")
        super().__init__([t0, 0.0], [t1, 2.0 * PI])
        self.t0, self.t1 = float(t0), float(t1)
        self.initial = initial

    @property
    def input_dim(self) -> int:
        return 3

    def embed(self, Xj):
        t, x = Xj[..., 0], Xj[..., 1]
        return J.stack([t, J.sin(x), J.cos(x)], axis=-1)

    def ansatz(self, raw, Xj):
        t, x = Xj[..., 0], Xj[..., 1]
        return self.initial.jet(x) + (t - self.t0) * raw

    def constraint_points(self, rng, n):
        x = rng.uniform(0.0, 2.0 * PI, size=n)
        X = np.stack([np.full(n, self.t0), x], axis=-1)
        return X, self.initial(x)

    def periodic_pairs(self, rng, n):
        """Points ``(t, x)`` and ``(t, x + 2 pi)`` that must give equal values."""
        t = rng.uniform(self.t0, self.t1, size=n)
        x = rng.uniform(0.0, 2.0 * PI, size=n)
        return np.stack([t, x], axis=-1), np.stack([t, x + 2.0 * PI], axis=-1)


class Advection(_PeriodicProblem):
    """``u_t + c u_x = 0`` with ``u(0, x) = sin x``."""

    name = "advection"
    seed_directions = (0, 1)
    seed_order = 1

    def __init__(self, c: float = 80.0):
        super().__init__(0.0, 1.0, FourierIC([0.0, 0.0], [0.0, 1.0]))
        self.c = float(c)

    def params(self):
        return {"c": self.c}

    def derivatives(self, model, theta, X):
        u = self.solution(model, theta, X, self.seed_directions, self.seed_order)
        return {"u": u.taylor[0], "u_t": _coeff(u, 0, 1), "u_x": _coeff(u, 1, 1)}

    def residual_from(self, d, X):
        return d["u_t"] + self.c * d["u_x"]

    def exact(self, X):
        X = np.asarray(X)
        return np.sin(X[..., 1] - self.c * X[..., 0])

    def exact_derivatives(self, X):
        X = np.asarray(X)
        arg = X[..., 1] - self.c * X[..., 0]
        return {"u": np.sin(arg), "u_t": -self.c * np.cos(arg), "u_x": np.cos(arg)}


KS_ALPHA = 100.0 / 16.0
KS_BETA = 100.0 / 16.0 ** 2
KS_GAMMA = 100.0 / 16.0 ** 4


def ks_initial() -> FourierIC:
    """``cos x (1 + sin x) = cos x + sin(2x) / 2``."""
    return FourierIC([0.0, 1.0, 0.0], [0.0, 0.0, 0.5])


class KuramotoSivashinsky(_PeriodicProblem):
    """``u_t + alpha u u_x + beta u_xx + gamma u_xxxx = 0`` on one time window."""

    name = "ks"
    seed_directions = (0, 1)
    seed_order = 4

    def __init__(self, t0: float = 0.0, t1: float = 0.1, initial: FourierIC | None = None,
                 alpha=KS_ALPHA, beta=KS_BETA, gamma=KS_GAMMA):
        super().__init__(t0, t1, ks_initial() if initial is None else initial)
        self.alpha, self.beta, self.gamma = float(alpha), float(beta), float(gamma)

    def params(self):
        return {"t0": self.t0, "t1": self.t1, "alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}

    def window(self, t0, t1, initial) -> "KuramotoSivashinsky":
        return KuramotoSivashinsky(t0, t1, initial, self.alpha, self.beta, self.gamma)

    def derivatives(self, model, theta, X):
        u = self.solution(model, theta, X, self.seed_directions, self.seed_order)
        return {
            "u": u.taylor[0],
            "u_t": _coeff(u, 0, 1),
            "u_x": _coeff(u, 1, 1),
            "u_xx": _coeff(u, 1, 2),
            "u_xxxx": _coeff(u, 1, 4),
        }

    def residual_from(self, d, X):
        return d["u_t"] + self.alpha * d["u"] * d["u_x"] + self.beta * d["u_xx"] + self.gamma * d["u_xxxx"]


# --------------------------------------------------------------------------
# supervised regression through the same interface

_TARGETS = {
    "sine": (1, lambda X: np.sin(PI * X[..., 0])),
    "product": (2, lambda X: X[..., 0] * X[..., 1]),
    "sinsin": (2, lambda X: np.sin(PI * X[..., 0]) * np.sin(PI * X[..., 1])),
}


class Regression(PdeProblem):
    """Supervised fit of a known target on ``[-1, 1]^dim``; the residual is ``u - f``.

    Targets: ``sine`` (``sin(pi x)``), ``product`` (``x y``) and ``sinsin``
    (``sin(pi x) sin(pi y)``). No constraint is imposed.
    """

    name = "regression"

    def __init__(self, target: str = "sine"):
        if target not in _TARGETS:
            raise ValueError(f"unknown target {target!r}; expected one of {sorted(_TARGETS)}")
        dim, self._f = _TARGETS[target]
        super().__init__([-1.0] * dim, [1.0] * dim)
        self.target = target
        self.coords = ("x", "y")[:dim]

    def params(self):
        return {"target": self.target}

    def derivatives(self, model, theta, X):
        return {"u": self.solution(model, theta, X)}

    def residual_from(self, d, X):
        return d["u"] - self.exact(X)

    def exact(self, X):
        return self._f(np.asarray(X, dtype=np.float64))

    def exact_derivatives(self, X):
        return {"u": self.exact(X)}

    def eval_grid(self, n=None):
        if n is None:
            n = (256,) * self.dim
        return super().eval_grid(n)

    def constraint_points(self, rng, n):
        return np.zeros((0, self.dim)), np.zeros(0)


PROBLEMS = {
    "poisson": Poisson,
    "helmholtz": Helmholtz,
    "allen_cahn": AllenCahn,
    "advection": Advection,
    "ks": KuramotoSivashinsky,
    "regression": Regression,
}


def make_problem(name: str, **params) -> PdeProblem:
    try:
        cls = PROBLEMS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; expected one of {sorted(PROBLEMS)}") from None
    return cls(**params)


def poisson_problem(w: int) -> Poisson:
    return Poisson(w)


def helmholtz_problem(w: int, kappa: float = 1.0) -> Helmholtz:
    return Helmholtz(w, kappa)


def allen_cahn_problem(D: float = 1e-4) -> AllenCahn:
    return AllenCahn(D)


def advection_problem(c: float = 80.0) -> Advection:
    return Advection(c)


def ks_problem(t0: float = 0.0, t1: float = 0.1) -> KuramotoSivashinsky:
    return KuramotoSivashinsky(t0, t1)
