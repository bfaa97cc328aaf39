import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from actnet.basis import EPS, SinBasis, eval_basis, eval_basis_jet, mu, sigma

NODES, WEIGHTS = np.polynomial.hermite_e.hermegauss(128)
WEIGHTS = WEIGHTS / np.sqrt(2.0 * np.pi)


def quadrature_moments(omega, phase):
    """Mean and std of sin(omega X + phase), X ~ N(0, 1), by 128-node Gauss-Hermite."""
    s = np.sin(omega * NODES + phase)
    m = WEIGHTS @ s
    return m, np.sqrt(WEIGHTS @ (s - m) ** 2)


finite_omega = st.floats(-3.0, 3.0, allow_nan=False)
finite_phase = st.floats(-np.pi, np.pi, allow_nan=False)


class TestMoments:
    def test_zero_frequency(self):
        assert mu(0.0, 0.7) == pytest.approx(np.sin(0.7))
        assert sigma(0.0, 0.7) == 0.0

    def test_large_frequency_limit(self):
        # exp(-w^2/2) underflows: mean 0, std 1/sqrt(2)
        assert mu(40.0, 1.0) == 0.0
        assert sigma(40.0, 1.0) == pytest.approx(1 / np.sqrt(2), abs=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(finite_omega, finite_phase)
    def test_against_quadrature(self, w, p):
        qm, qs = quadrature_moments(w, p)
        assert mu(w, p) == pytest.approx(qm, abs=1e-12)
        assert sigma(w, p) == pytest.approx(qs, abs=1e-10)

    @settings(max_examples=200, deadline=None)
    @given(finite_omega, finite_phase)
    def test_second_moment_identity(self, w, p):
        # E[sin^2] = 1/2 - exp(-2 w^2) cos(2p) / 2
        lhs = sigma(w, p) ** 2 + mu(w, p) ** 2
        assert lhs == pytest.approx(0.5 - 0.5 * np.exp(-2 * w * w) * np.cos(2 * p), abs=1e-14)

    def test_small_frequency_has_no_cancellation(self):
        # leading order: sigma ~ |w cos p|
        w = 1e-9
        assert sigma(w, 0.3) == pytest.approx(w * np.cos(0.3), rel=1e-6)


class TestSinBasis:
    def test_rejects_mismatched_vectors(self):
        with pytest.raises(ValueError):
            SinBasis(np.ones(3), np.ones(2))
        with pytest.raises(ValueError):
            SinBasis(np.ones(2), np.ones(2), eps=0.0)

    def test_eval_shape_and_values(self):
        b = SinBasis(np.array([1.0, 2.0]), np.array([0.0, 0.5]))
        x = np.array([0.1, -0.4, 0.9])
        B = eval_basis(b, x)
        assert B.shape == (2, 3)
        expect = (np.sin(2.0 * x[1] + 0.5) - mu(2.0, 0.5)) / (sigma(2.0, 0.5) + EPS)
        assert B[1, 1] == pytest.approx(expect, rel=1e-14)

    def test_standardized_under_normal_inputs(self):
        rng = np.random.default_rng(3)
        b = SinBasis(rng.normal(size=5), rng.uniform(-np.pi, np.pi, size=5))
        B = eval_basis(b, rng.normal(size=400_000))
        assert np.all(np.abs(B.mean(axis=1)) < 0.01)
        assert np.all(np.abs(B.std(axis=1) - 1.0) < 0.01)

    def test_jet_derivatives_match_finite_differences(self):
        b = SinBasis(np.array([0.7, -1.3]), np.array([0.2, 1.1]))
        x = np.array([0.3, -0.8])
        D = eval_basis_jet(b, x, 1, 2)
        h = 1e-4
        e = np.array([0.0, h])
        fd1 = (eval_basis(b, x + e) - eval_basis(b, x - e)) / (2 * h)
        fd2 = (eval_basis(b, x + e) - 2 * eval_basis(b, x) + eval_basis(b, x - e)) / h ** 2
        assert np.allclose(D[1], fd1, atol=1e-7)
        assert np.allclose(D[2], fd2, atol=1e-5)
        assert np.all(D[1:, :, 0] == 0.0)

    def test_jet_order_checked(self):
        b = SinBasis(np.ones(1), np.zeros(1))
        with pytest.raises(ValueError):
            eval_basis_jet(b, [0.0], 0, 5)
        with pytest.raises(IndexError):
            eval_basis_jet(b, [0.0], 2, 1)
