"""Truncated Taylor arithmetic up to fourth order.

A :class:`Jet` carries normalized Taylor coefficients ``taylor[k] = u^(k)/k!``
of a quantity along one input direction; :meth:`Jet.deriv` converts back to
plain derivatives. Coefficients may be floats, numpy arrays or tape ``Var``
objects, so parameter gradients flow through jet arithmetic unchanged.

Several directions can share one value: ``taylor[0]`` has shape ``S`` while
``taylor[k >= 1]`` has shape ``(D, *S)``. Every rule below is written so that
numpy broadcasting keeps the D directions independent, which means shape
manipulations inside network code must address trailing axes only.
"""

from __future__ import annotations

from math import factorial

import numpy as np

from . import tape as T

MAX_ORDER = 4


class SingularityError(ZeroDivisionError):
    """Division by a jet whose value part vanishes."""


def _is_const(x):
    return not isinstance(x, Jet)


class Jet:
    __slots__ = ("taylor",)

    def __init__(self, taylor):
        taylor = list(taylor)
        if not 1 <= len(taylor) <= MAX_ORDER + 1:
            raise ValueError(f"jet order must be in 0..{MAX_ORDER}, got {len(taylor) - 1}")
        self.taylor = taylor

    @classmethod
    def variable(cls, x0, order: int) -> "Jet":
        """The identity function ``t`` expanded at ``t = x0``."""
        return cls([x0, 1.0] + [0.0] * (order - 1)) if order >= 1 else cls([x0])

    @classmethod
    def from_derivatives(cls, derivs) -> "Jet":
        return cls([d / factorial(k) if k > 1 else d for k, d in enumerate(derivs)])

    @property
    def order(self) -> int:
        return len(self.taylor) - 1

    @property
    def value(self):
        return self.taylor[0]

    def deriv(self, k: int):
        c = self.taylor[k]
        return c * factorial(k) if k > 1 else c

    def derivatives(self):
        return [self.deriv(k) for k in range(self.order + 1)]

    def __repr__(self):
        return f"Jet(order={self.order}, derivs={self.derivatives()!r})"

    def _check(self, other: "Jet"):
        if other.order != self.order:
            raise ValueError(f"jet orders differ: {self.order} vs {other.order}")

    def linear(self, fn) -> "Jet":
        """Apply a linear map to every coefficient."""
        return Jet([fn(c) for c in self.taylor])

    # arithmetic ---------------------------------------------------------

    def __add__(self, o):
        if _is_const(o):
            return Jet([self.taylor[0] + o] + self.taylor[1:])
        self._check(o)
        return Jet([a + b for a, b in zip(self.taylor, o.taylor)])

    __radd__ = __add__

    def __neg__(self):
        return Jet([-c for c in self.taylor])

    def __sub__(self, o):
        if _is_const(o):
            return Jet([self.taylor[0] - o] + self.taylor[1:])
        self._check(o)
        return Jet([a - b for a, b in zip(self.taylor, o.taylor)])

    def __rsub__(self, o):
        return Jet([o - self.taylor[0]] + [-c for c in self.taylor[1:]])

    def __mul__(self, o):
        if _is_const(o):
            return Jet([c * o for c in self.taylor])
        self._check(o)
        a, b = self.taylor, o.taylor
        out = []
        for k in range(len(a)):
            acc = a[0] * b[k]
            for j in range(1, k + 1):
                acc = acc + a[j] * b[k - j]
            out.append(acc)
        return Jet(out)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        return _divide(1.0, self)

    def __truediv__(self, o):
        if _is_const(o):
            return Jet([c / o for c in self.taylor])
        return _divide(self, o)

    def __rtruediv__(self, o):
        return _divide(o, self)

    def __pow__(self, n):
        if isinstance(n, (int, np.integer)) and n >= 0:
            out = None
            base = self
            k = int(n)
            while k:
                if k & 1:
                    out = base if out is None else out * base
                k >>= 1
                if k:
                    base = base * base
            if out is None:
                return Jet([self.taylor[0] * 0.0 + 1.0] + [c * 0.0 for c in self.taylor[1:]])
            return out
        return _real_power(self, float(n))

    def __matmul__(self, m):
        return self.linear(lambda c: T.matmul(c, m))

    def __getitem__(self, key):
        return self.linear(lambda c: T.getitem(c, key))

    # elementary functions -----------------------------------------------

    def sincos(self):
        s, c = _sincos_taylor(self.taylor, full_cos=True)
        return Jet(s), Jet(c)

    def sin(self):
        return Jet(_sincos_taylor(self.taylor, full_cos=False)[0])

    def cos(self):
        return Jet(_sincos_taylor(self.taylor, full_cos=True)[1])

    def exp(self):
        u = self.taylor
        e = [T.exp(u[0])]
        for k in range(1, len(u)):
            acc = u[1] * e[k - 1]
            for j in range(2, k + 1):
                acc = acc + (j * u[j]) * e[k - j]
            e.append(acc * (1.0 / k) if k > 1 else acc)
        return Jet(e)

    def sqrt(self):
        return _real_power(self, 0.5)


def _sincos_taylor(u, full_cos):
    K = len(u) - 1
    s0, c0 = T.sincos(u[0])
    s, c = [s0], [c0]
    for k in range(1, K + 1):
        sk = u[1] * c[k - 1]
        for j in range(2, k + 1):
            sk = sk + (j * u[j]) * c[k - j]
        if k > 1:
            sk = sk * (1.0 / k)
        s.append(sk)
        if k < K or full_cos:
            ck = u[1] * s[k - 1]
            for j in range(2, k + 1):
                ck = ck + (j * u[j]) * s[k - j]
            c.append(ck * (-1.0 / k))
    return s, c


def _check_nonsingular(v0):
    v = np.abs(T.value_of(v0))
    if np.any(v < 1e-300):
        raise SingularityError("jet division by a value part that is zero")


def _divide(u, v: Jet) -> Jet:
    _check_nonsingular(v.taylor[0])
    b = v.taylor
    if _is_const(u):
        a = [u] + [0.0] * v.order
    else:
        v._check(u)
        a = u.taylor
    inv0 = 1.0 / b[0]
    q = [a[0] * inv0]
    for k in range(1, len(b)):
        acc = a[k] - b[1] * q[k - 1]
        for j in range(2, k + 1):
            acc = acc - b[j] * q[k - j]
        q.append(acc * inv0)
    return Jet(q)


def _real_power(u: Jet, alpha: float) -> Jet:
    _check_nonsingular(u.taylor[0])
    a = u.taylor
    p = [T.power(a[0], alpha)]
    inv0 = 1.0 / a[0]
    for k in range(1, len(a)):
        acc = None
        for j in range(1, k + 1):
            term = ((alpha * j - (k - j)) * a[j]) * p[k - j]
            acc = term if acc is None else acc + term
        p.append(acc * inv0 * (1.0 / k))
    return Jet(p)


# dispatching helpers usable on arrays, Vars and Jets alike ----------------

def sin(x):
    return x.sin() if isinstance(x, Jet) else T.sin(x)


def cos(x):
    return x.cos() if isinstance(x, Jet) else T.cos(x)


def exp(x):
    return x.exp() if isinstance(x, Jet) else T.exp(x)


def sqrt(x):
    return x.sqrt() if isinstance(x, Jet) else T.sqrt(x)


def sum(x, axis=None):
    if isinstance(x, Jet):
        if axis is None or (isinstance(axis, int) and axis >= 0):
            raise ValueError("jets reduce over explicit negative axes only")
        return x.linear(lambda c: T.sum(c, axis=axis))
    return T.sum(x, axis=axis)


def swapaxes(x, i, j):
    if isinstance(x, Jet):
        return x.linear(lambda c: T.swapaxes(c, i, j))
    return T.swapaxes(x, i, j)


def expand_dims(x, axis):
    if isinstance(x, Jet):
        return x.linear(lambda c: T.expand_dims(c, axis))
    return T.expand_dims(x, axis)


def merge_last2(x):
    """Reshape ``(..., a, b)`` to ``(..., a*b)``."""
    def fn(c):
        shape = np.shape(T.value_of(c))
        return T.reshape(c, shape[:-2] + (shape[-2] * shape[-1],))
    return x.linear(fn) if isinstance(x, Jet) else fn(x)


def stack(xs, axis=-1):
    """Stack along a trailing axis; constant entries are promoted to jets."""
    xs = list(xs)
    jets = [x for x in xs if isinstance(x, Jet)]
    if not jets:
        return T.stack(xs, axis=axis)
    if axis >= 0:
        raise ValueError("jets stack along negative axes only")
    K = jets[0].order
    ref = jets[0].taylor
    cols = []
    for x in xs:
        if isinstance(x, Jet):
            cols.append(x.taylor)
        else:
            zero = np.zeros(np.shape(T.value_of(ref[1]))) if K else None
            base = x + np.zeros(np.shape(T.value_of(ref[0])))
            cols.append([base] + [zero] * K)
    return Jet([T.stack([col[k] for col in cols], axis=axis) for k in range(K + 1)])


def value(x):
    """Order-0 part of a jet, or the argument itself."""
    return x.taylor[0] if isinstance(x, Jet) else x


def seed(x0: np.ndarray, directions, order: int) -> Jet:
    """Input jet for points ``x0`` of shape ``(..., dim)``.

    ``directions`` lists one coordinate index per direction; the resulting
    higher coefficients have shape ``(len(directions), ..., dim)``.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in 0..{MAX_ORDER}, got {order}")
    directions = list(directions)
    taylor = [x0]
    if order >= 1:
        first = np.zeros((len(directions),) + x0.shape)
        for d, coord in enumerate(directions):
            first[d, ..., coord] = 1.0
        taylor.append(first)
        taylor += [np.zeros_like(first) for _ in range(order - 1)]
    return Jet(taylor)
