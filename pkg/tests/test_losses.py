import numpy as np
import pytest

from actnet.autodiff.grad import loss_grad
from actnet.autodiff.tape import CapabilityError
from actnet.core import make_rng
from actnet.models import build_model
from actnet.pinn import AllenCahn, CausalSchedule, Poisson, causal_weights, relative_l2, residual_loss, time_bins
from actnet.pinn.losses import model_field


class TestCausalWeights:
    def test_first_bin_has_unit_weight(self):
        w = causal_weights([3.0, 1.0, 2.0], 0.5)
        assert np.allclose(w, [1.0, np.exp(-1.5), np.exp(-2.0)])

    def test_monotone_non_increasing(self):
        w = causal_weights(np.random.default_rng(0).uniform(0, 1, 32), 10.0)
        assert np.all(np.diff(w) <= 0)

    def test_bins(self):
        assert np.array_equal(time_bins([0.0, 0.49, 0.5, 1.0], 0.0, 1.0, 2), [0, 0, 1, 1])

    def test_schedule(self):
        s = CausalSchedule((1.0, 10.0), steps_per_phase=5)
        assert [s.epsilon_at(k) for k in (0, 4, 5, 99)] == [1.0, 1.0, 10.0, 10.0]
        with pytest.raises(ValueError):
            CausalSchedule(())
        with pytest.raises(ValueError):
            CausalSchedule((1.0, -1.0))


class TestResidualLoss:
    def setup_method(self):
        self.model = build_model("actnet", dict(d_in=2, d_out=1, m=5, N=3, L=1))
        self.theta = self.model.init(make_rng(0))

    def test_plain_mean_square(self):
        p = Poisson(1)
        X = p.sample(make_rng(1), 64)
        r = p.residual(self.model, self.theta, X)
        assert float(residual_loss(p, self.model, self.theta, X)) == pytest.approx(np.mean(r ** 2), rel=1e-14)

    def test_causal_loss_by_hand(self):
        p = AllenCahn()
        X = p.sample(make_rng(2), 200)
        r2 = p.residual(self.model, self.theta, X) ** 2
        idx = time_bins(X[:, 0], 0.0, 1.0, 4)
        used = [k for k in range(4) if np.any(idx == k)]
        L = np.array([r2[idx == k].mean() for k in used])
        expect = np.sum(causal_weights(L, 0.1) * L) / len(used)
        assert float(residual_loss(p, self.model, self.theta, X, 0.1, 4)) == pytest.approx(expect, rel=1e-12)

    def test_causal_weights_are_not_differentiated(self):
        p = AllenCahn()
        X = p.sample(make_rng(3), 64)
        eps, h = 0.5, 1e-6
        _, g = loss_grad(lambda th, Y: residual_loss(p, self.model, th, Y, eps, 4), self.theta, X)
        idx = time_bins(X[:, 0], 0.0, 1.0, 4)

        def frozen(th):
            r2 = p.residual(self.model, th, X) ** 2
            used = [k for k in range(4) if np.any(idx == k)]
            return np.sum(w * np.array([r2[idx == k].mean() for k in used])) / len(used)

        r2 = p.residual(self.model, self.theta, X) ** 2
        w = causal_weights([r2[idx == k].mean() for k in range(4) if np.any(idx == k)], eps)
        i = 7
        e = np.zeros_like(self.theta)
        e[i] = h
        assert g[i] == pytest.approx((frozen(self.theta + e) - frozen(self.theta - e)) / (2 * h), rel=1e-5)

    def test_causal_needs_time_axis(self):
        p = Poisson(1)
        with pytest.raises(CapabilityError):
            residual_loss(p, self.model, self.theta, p.sample(make_rng(0), 4), 1.0)

    def test_empty_batch(self):
        with pytest.raises(ValueError):
            residual_loss(Poisson(1), self.model, self.theta, np.zeros((0, 2)))


class TestRelativeL2:
    def test_exact_field_scores_zero(self):
        p = Poisson(2)
        assert relative_l2(p, p.exact) == 0.0

    def test_scaled_field(self):
        p = Poisson(1)
        assert relative_l2(p, lambda X: 1.1 * p.exact(X)) == pytest.approx(0.1, rel=1e-12)

    def test_no_closed_form(self):
        with pytest.raises(CapabilityError):
            relative_l2(AllenCahn(), lambda X: X[:, 0])

    def test_model_field_chunks(self):
        p = Poisson(1)
        model = build_model("actnet", dict(d_in=2, d_out=1, m=4, N=2, L=1))
        theta = model.init(make_rng(0))
        X = p.sample(make_rng(1), 100)
        assert np.array_equal(model_field(p, model, theta, chunk=7)(X), p.solution(model, theta, X))
