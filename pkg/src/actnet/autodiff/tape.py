"""Reverse-mode accumulation over numpy arrays.

A :class:`Tape` records every operation applied to its :class:`Var` nodes in
creation order, which is already a topological order, so the backward sweep
is a single reverse pass over the node list with one adjoint slot per node.

Module-level functions (``sin``, ``matmul``, ``sum`` ...) accept plain arrays
as well as ``Var``; with no ``Var`` operand they return plain numpy results and
record nothing.
"""

from __future__ import annotations

import numpy as np


class CapabilityError(TypeError):
    """An operation without a recorded derivative was applied to a Var."""


class Tape:
    __slots__ = ("_parents", "_vjps")

    def __init__(self):
        self._parents: list[tuple[int, ...]] = []
        self._vjps: list[tuple] = []

    def __len__(self):
        return len(self._parents)

    def variable(self, value) -> "Var":
        """Register a leaf (an independent input)."""
        return self._push(np.asarray(value, dtype=np.float64), (), ())

    def _push(self, value, parents, vjps) -> "Var":
        self._parents.append(tuple(p.index for p in parents))
        self._vjps.append(vjps)
        return Var(value, self, len(self._parents) - 1)

    def gradient(self, out: "Var", wrt) -> list[np.ndarray]:
        """Adjoints of the scalar ``out`` with respect to each Var in ``wrt``."""
        if out.tape is not self:
            raise ValueError("output was not recorded on this tape")
        if out.value.size != 1:
            raise ValueError(f"gradient needs a scalar output, got shape {out.value.shape}")
        adj: list = [None] * (out.index + 1)
        adj[out.index] = np.ones_like(out.value)
        parents, vjps = self._parents, self._vjps
        for i in range(out.index, -1, -1):
            g = adj[i]
            if g is None or not parents[i]:
                continue
            for p, f in zip(parents[i], vjps[i]):
                gp = f(g)
                if isinstance(gp, _SlotGrad):
                    slots = adj[p]
                    if slots is None:
                        slots = adj[p] = [None] * gp.n
                    k = gp.k
                    slots[k] = gp.g if slots[k] is None else slots[k] + gp.g
                else:
                    adj[p] = gp if adj[p] is None else adj[p] + gp
        result = []
        for v in wrt:
            g = adj[v.index] if v.index < len(adj) else None
            result.append(np.zeros_like(v.value) if g is None else np.asarray(g).reshape(v.value.shape))
        return result


    def push_multi(self, values, parents, vjp_multi) -> list["Var"]:
        """Record an operation with several outputs.

        ``vjp_multi(grads)`` gets one adjoint per output (``None`` where an
        output did not reach the loss) and returns one adjoint per parent.
        """
        n = len(values)
        store = []

        def part(slots, i):
            # parents are visited in order, so part 0 runs first in every sweep
            if i == 0:
                store[:] = [vjp_multi(slots)]
            return store[0][i]

        hub = self._push(None, parents, tuple((lambda slots, i=i: part(slots, i)) for i in range(len(parents))))
        return [self._push(v, (hub,), (lambda g, k=k: _SlotGrad(k, n, g),)) for k, v in enumerate(values)]


class _SlotGrad:
    __slots__ = ("k", "n", "g")

    def __init__(self, k, n, g):
        self.k, self.n, self.g = k, n, g


_SUPPORTED_UFUNCS = {}


class Var:
    """An array value recorded on a tape."""

    __slots__ = ("value", "tape", "index")

    def __init__(self, value, tape: Tape, index: int):
        self.value = value
        self.tape = tape
        self.index = index

    shape = property(lambda self: self.value.shape)
    ndim = property(lambda self: self.value.ndim)
    size = property(lambda self: self.value.size)
    dtype = property(lambda self: self.value.dtype)

    def __repr__(self):
        return f"Var(shape={self.value.shape}, index={self.index})"

    def __len__(self):
        return len(self.value)

    def __float__(self):
        return float(self.value)

    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        fn = _SUPPORTED_UFUNCS.get(ufunc)
        if method != "__call__" or fn is None or kwargs:
            raise CapabilityError(f"no derivative rule recorded for numpy.{ufunc.__name__} ({method})")
        return fn(*inputs)

    def __add__(self, o):
        return add(self, o)

    def __radd__(self, o):
        return add(o, self)

    def __sub__(self, o):
        return subtract(self, o)

    def __rsub__(self, o):
        return subtract(o, self)

    def __mul__(self, o):
        return multiply(self, o)

    def __rmul__(self, o):
        return multiply(o, self)

    def __truediv__(self, o):
        return divide(self, o)

    def __rtruediv__(self, o):
        return divide(o, self)

    def __neg__(self):
        return negative(self)

    def __pow__(self, n):
        return power(self, n)

    def __matmul__(self, o):
        return matmul(self, o)

    def __rmatmul__(self, o):
        return matmul(o, self)

    def __getitem__(self, key):
        return getitem(self, key)

    @property
    def T(self):
        return transpose(self)

    def sum(self, axis=None, keepdims=False, **kwargs):
        return sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False, **kwargs):
        return mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)


def value_of(x):
    return x.value if isinstance(x, Var) else x


def _tape_of(*xs):
    tape = None
    for x in xs:
        if isinstance(x, Var):
            if tape is None:
                tape = x.tape
            elif x.tape is not tape:
                raise ValueError("operands belong to different tapes")
    return tape


def _unbroadcast(g, shape):
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    axes = tuple(range(extra)) + tuple(extra + i for i, n in enumerate(shape) if n == 1 and g.shape[extra + i] != 1)
    return g.sum(axis=axes).reshape(shape)


def _record(tape, value, pairs):
    """Push ``value`` with (operand, vjp) pairs, skipping non-Var operands."""
    parents, vjps = [], []
    for x, f in pairs:
        if isinstance(x, Var):
            parents.append(x)
            vjps.append(f)
    return tape._push(value, parents, tuple(vjps))


def _shape(x):
    return np.shape(value_of(x))


def add(a, b):
    tape = _tape_of(a, b)
    va, vb = value_of(a), value_of(b)
    out = va + vb
    if tape is None:
        return out
    sa, sb = _shape(a), _shape(b)
    return _record(tape, out, [(a, lambda g: _unbroadcast(g, sa)), (b, lambda g: _unbroadcast(g, sb))])


def subtract(a, b):
    tape = _tape_of(a, b)
    va, vb = value_of(a), value_of(b)
    out = va - vb
    if tape is None:
        return out
    sa, sb = _shape(a), _shape(b)
    return _record(tape, out, [(a, lambda g: _unbroadcast(g, sa)), (b, lambda g: _unbroadcast(-g, sb))])


def multiply(a, b):
    tape = _tape_of(a, b)
    va, vb = value_of(a), value_of(b)
    out = va * vb
    if tape is None:
        return out
    sa, sb = np.shape(va), np.shape(vb)
    return _record(tape, out, [(a, lambda g: _unbroadcast(g * vb, sa)), (b, lambda g: _unbroadcast(g * va, sb))])


def divide(a, b):
    tape = _tape_of(a, b)
    va, vb = value_of(a), value_of(b)
    out = va / vb
    if tape is None:
        return out
    sa, sb = np.shape(va), np.shape(vb)
    return _record(tape, out, [
        (a, lambda g: _unbroadcast(g / vb, sa)),
        (b, lambda g: _unbroadcast(-g * out / vb, sb)),
    ])


def negative(a):
    if not isinstance(a, Var):
        return -a
    return _record(a.tape, -a.value, [(a, lambda g: -g)])


def power(a, n):
    """``a ** n`` for a constant exponent."""
    if isinstance(n, Var):
        raise CapabilityError("power with a recorded exponent is not supported")
    if not isinstance(a, Var):
        return a ** n
    va = a.value
    if n == 2:
        return _record(a.tape, va * va, [(a, lambda g: 2.0 * g * va)])
    return _record(a.tape, va ** n, [(a, lambda g: g * n * va ** (n - 1))])


def square(a):
    return power(a, 2)


def sin(a):
    if not isinstance(a, Var):
        return np.sin(a)
    va = a.value
    return _record(a.tape, np.sin(va), [(a, lambda g: g * np.cos(va))])


def cos(a):
    if not isinstance(a, Var):
        return np.cos(a)
    va = a.value
    return _record(a.tape, np.cos(va), [(a, lambda g: -g * np.sin(va))])


def sincos(a):
    """``(sin a, cos a)``; when recorded, each backward reuses the other's value."""
    va = value_of(a)
    s, c = np.sin(va), np.cos(va)
    if not isinstance(a, Var):
        return s, c
    return (
        _record(a.tape, s, [(a, lambda g: g * c)]),
        _record(a.tape, c, [(a, lambda g: -g * s)]),
    )


def exp(a):
    if not isinstance(a, Var):
        return np.exp(a)
    out = np.exp(a.value)
    return _record(a.tape, out, [(a, lambda g: g * out)])


def expm1(a):
    if not isinstance(a, Var):
        return np.expm1(a)
    out = np.expm1(a.value)
    return _record(a.tape, out, [(a, lambda g: g * (out + 1.0))])


def sqrt(a):
    if not isinstance(a, Var):
        return np.sqrt(a)
    out = np.sqrt(a.value)
    return _record(a.tape, out, [(a, lambda g: 0.5 * g / out)])


def maximum(a, b):
    """Elementwise max; ties send the gradient to ``a``."""
    tape = _tape_of(a, b)
    va, vb = value_of(a), value_of(b)
    out = np.maximum(va, vb)
    if tape is None:
        return out
    mask = va >= vb
    sa, sb = np.shape(va), np.shape(vb)
    return _record(tape, out, [
        (a, lambda g: _unbroadcast(np.where(mask, g, 0.0), sa)),
        (b, lambda g: _unbroadcast(np.where(mask, 0.0, g), sb)),
    ])


def matmul(a, b):
    tape = _tape_of(a, b)
    va, vb = value_of(a), value_of(b)
    out = va @ vb
    if tape is None:
        return out
    if vb.ndim == 2 and va.ndim >= 1:
        sa = va.shape

        def grad_a(g):
            return g @ vb.T

        def grad_b(g):
            return va.reshape(-1, sa[-1]).T @ g.reshape(-1, vb.shape[-1])

    elif vb.ndim == 1 and va.ndim == 2:

        def grad_a(g):
            return np.outer(g, vb)

        def grad_b(g):
            return va.T @ g

    else:
        raise CapabilityError(f"recorded matmul does not support shapes {va.shape} @ {vb.shape}")
    return _record(tape, out, [(a, grad_a), (b, grad_b)])


def sum(a, axis=None, keepdims=False):
    if not isinstance(a, Var):
        return np.sum(a, axis=axis, keepdims=keepdims)
    va = a.value
    out = np.sum(va, axis=axis, keepdims=keepdims)
    shape = va.shape

    def vjp(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return np.broadcast_to(g, shape)

    return _record(a.tape, np.asarray(out), [(a, vjp)])


def mean(a, axis=None, keepdims=False):
    n = np.size(value_of(a)) if axis is None else np.prod([np.shape(value_of(a))[i] for i in np.atleast_1d(axis)])
    return multiply(sum(a, axis=axis, keepdims=keepdims), 1.0 / n)


def reshape(a, shape):
    if not isinstance(a, Var):
        return np.reshape(a, shape)
    old = a.value.shape
    return _record(a.tape, a.value.reshape(shape), [(a, lambda g: g.reshape(old))])


def transpose(a):
    if not isinstance(a, Var):
        return np.transpose(a)
    return _record(a.tape, a.value.T, [(a, lambda g: g.T)])


def swapaxes(a, i, j):
    if not isinstance(a, Var):
        return np.swapaxes(a, i, j)
    return _record(a.tape, np.swapaxes(a.value, i, j), [(a, lambda g: np.swapaxes(g, i, j))])


def getitem(a, key):
    if not isinstance(a, Var):
        return a[key]
    va = a.value
    fancy = _needs_add_at(key)

    def vjp(g):
        out = np.zeros_like(va)
        if fancy:
            np.add.at(out, key, g)
        else:
            out[key] = g
        return out

    return _record(a.tape, va[key], [(a, vjp)])


def _needs_add_at(key):
    keys = key if isinstance(key, tuple) else (key,)
    return any(isinstance(k, (list, np.ndarray)) for k in keys)


def expand_dims(a, axis):
    if not isinstance(a, Var):
        return np.expand_dims(a, axis)
    old = a.value.shape
    return _record(a.tape, np.expand_dims(a.value, axis), [(a, lambda g: g.reshape(old))])


def stack(xs, axis=0):
    xs = list(xs)
    tape = _tape_of(*xs)
    vals = [value_of(x) for x in xs]
    out = np.stack(vals, axis=axis)
    if tape is None:
        return out
    ax = axis if axis >= 0 else out.ndim + axis
    pairs = [(x, (lambda g, i=i: np.take(g, i, axis=ax))) for i, x in enumerate(xs)]
    return _record(tape, out, pairs)


def concatenate(xs, axis=0):
    xs = list(xs)
    tape = _tape_of(*xs)
    vals = [value_of(x) for x in xs]
    out = np.concatenate(vals, axis=axis)
    if tape is None:
        return out
    bounds = np.cumsum([0] + [v.shape[axis] for v in vals])
    pairs = []
    for i, x in enumerate(xs):
        sl = [slice(None)] * out.ndim
        sl[axis] = slice(bounds[i], bounds[i + 1])
        pairs.append((x, lambda g, sl=tuple(sl): g[sl]))
    return _record(tape, out, pairs)


def stop_gradient(a):
    return value_of(a)


_SUPPORTED_UFUNCS.update({
    np.add: add,
    np.subtract: subtract,
    np.multiply: multiply,
    np.true_divide: divide,
    np.negative: negative,
    np.sin: sin,
    np.cos: cos,
    np.exp: exp,
    np.expm1: expm1,
    np.sqrt: sqrt,
    np.square: square,
    np.matmul: matmul,
    np.maximum: maximum,
})
