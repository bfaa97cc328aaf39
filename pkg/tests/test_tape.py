import numpy as np
import pytest

from actnet.autodiff import tape as T
from actnet.autodiff.grad import loss_grad
from actnet.autodiff.tape import CapabilityError, Tape


def fd_grad(f, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        g.flat[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


class TestGradients:
    @pytest.mark.parametrize("fn", [
        lambda v: T.sum(T.sin(v) * T.exp(v)),
        lambda v: T.sum(T.sqrt(T.square(v) + 1.0) / (2.0 + T.cos(v))),
        lambda v: T.sum(T.maximum(v, 0.1) ** 3),
        lambda v: T.mean(T.expm1(-T.square(v))),
        lambda v: T.sum(T.matmul(T.reshape(v, (2, 3)), T.transpose(T.reshape(v, (2, 3))))),
        lambda v: T.sum(T.stack([v[1:], v[:-1]], axis=0) * np.arange(5.0)),
        lambda v: T.sum(T.concatenate([v, v * 2.0]) ** 2),
    ])
    def test_matches_finite_differences(self, fn):
        x = np.array([0.3, -1.2, 0.8, 2.0, -0.4, 1.5])
        val, g = loss_grad(lambda th, _: fn(th), x, None)
        assert val == pytest.approx(float(fn(x)))
        assert np.allclose(g, fd_grad(lambda y: float(fn(y)), x), atol=1e-7)

    def test_fancy_index_accumulates(self):
        x = np.array([1.0, 2.0, 3.0])
        _, g = loss_grad(lambda th, _: T.sum(th[np.array([0, 0, 2])]), x, None)
        assert np.array_equal(g, [2.0, 0.0, 1.0])

    def test_broadcast_reduces_gradient(self):
        x = np.array([1.0, 2.0])
        _, g = loss_grad(lambda th, _: T.sum(th * np.ones((3, 2))), x, None)
        assert np.array_equal(g, [3.0, 3.0])

    def test_stop_gradient(self):
        x = np.array([1.5])
        _, g = loss_grad(lambda th, _: T.sum(th * T.stop_gradient(th)), x, None)
        assert g[0] == pytest.approx(1.5)

    def test_constant_loss_has_zero_gradient(self):
        val, g = loss_grad(lambda th, _: 4.0, np.ones(3), None)
        assert val == 4.0 and np.array_equal(g, np.zeros(3))

    def test_numpy_ufuncs_dispatch(self):
        x = np.array([0.2, 0.4])
        _, g = loss_grad(lambda th, _: T.sum(np.sin(th)), x, None)
        assert np.allclose(g, np.cos(x))


class TestErrors:
    def test_unsupported_ufunc(self):
        tape = Tape()
        v = tape.variable(np.ones(2))
        with pytest.raises(CapabilityError):
            np.tanh(v)

    def test_non_scalar_output(self):
        tape = Tape()
        v = tape.variable(np.ones(2))
        with pytest.raises(ValueError):
            tape.gradient(v * 2.0, [v])

    def test_foreign_tape(self):
        a, b = Tape(), Tape()
        v = a.variable(1.0)
        with pytest.raises(ValueError):
            b.gradient(v, [v])
