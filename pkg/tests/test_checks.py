import numpy as np
import pytest

from actnet.basis import mu, sigma
from actnet.checks import (
    CheckResult,
    depth_variances,
    gauss_hermite_moments,
    jacobian_fd_error,
    jet_fd_errors,
    jet_jacobian_error,
    layer_output_moments,
    monte_carlo_deviation,
    rel_err,
    residual_grad_error,
    supervised_grad_error,
)


class TestHelpers:
    def test_line(self):
        assert CheckResult("x", True, "d").line() == "PASS x: d"
        assert CheckResult("x", False, "d").line() == "FAIL x: d"

    def test_rel_err(self):
        assert rel_err(np.array([1.0, 2.1]), np.array([1.0, 2.0])) == pytest.approx(0.05)


class TestReducedSuites:
    def test_layer_moments_small(self):
        mean, var = layer_output_moments(2, 16, 8, n_inits=2000, n_inputs=5)
        assert mean.shape == (16,) and np.max(np.abs(mean)) < 0.1
        assert np.max(np.abs(var - 1)) < 0.2

    def test_depth_variances_shape(self):
        v = depth_variances(m=16, N=4, L=3, n_inits=4, n_inputs=100)
        assert v.shape == (3,) and np.all(v > 0)

    def test_derivative_errors(self):
        assert jacobian_fd_error(10) < 1e-5
        assert jet_jacobian_error(10) < 1e-12
        e2, e4 = jet_fd_errors(n_trials=4)
        assert e2 < 1e-4 and e4 < 1e-2
        assert supervised_grad_error()[0] < 1e-5
        assert residual_grad_error(n_params=10) < 1e-4

    def test_quadrature_against_closed_form(self):
        om, ph = np.array([0.3, -1.2]), np.array([0.5, 2.0])
        gm, gs = gauss_hermite_moments(om, ph)
        assert np.allclose(gm, mu(om, ph), atol=1e-13) and np.allclose(gs, sigma(om, ph), atol=1e-12)

    def test_monte_carlo_small(self):
        zm, zs = monte_carlo_deviation(np.array([0.5]), np.array([0.1]), n_samples=100_000)
        assert zm < 5 and zs < 5
