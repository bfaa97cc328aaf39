"""Property suites run by ``actnet check``.

Each suite returns a list of :class:`CheckResult`; the thresholds are the
documented acceptance tolerances. Sizes can be reduced for quick runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import jet as J
from .autodiff import loss_grad
from .basis import SinBasis, mu, sigma
from .core import make_rng
from .models import build_model, directional_jet
from .network import actlayer_forward, actlayer_jacobian, init_actlayer
from .pinn.losses import residual_loss
from .pinn.problems import poisson_problem


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def rel_err(a, b) -> float:
    """``max|a - b| / max|b|``, the error relative to the reference scale."""
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    scale = np.max(np.abs(b))
    return float(np.max(np.abs(a - b)) / (scale if scale > 0 else 1.0))


# --------------------------------------------------------------------------
# initialization statistics

def layer_output_moments(d, m, N, n_inits, n_inputs, seed=0, dist="uniform", chunk=200):
    """Per-output mean and variance of a freshly initialized ActLayer.

    Each of the ``n_inits * n_inputs`` draws pairs an independent
    initialization with inputs ``x ~ N(0, I_d)``; the moments are taken over
    all draws, separately for each output coordinate.
    """
    rng = make_rng(seed, 11)
    s1 = np.zeros(m)
    s2 = np.zeros(m)
    done = 0
    while done < n_inits:
        B = min(chunk, n_inits - done)
        layers = [init_actlayer(rng, d, m, N, dist=dist) for _ in range(B)]
        beta = np.stack([p.beta for p in layers])                     # (B, m, N)
        lam = np.stack([p.lam for p in layers])                       # (B, m, d)
        om = np.stack([p.basis.omega for p in layers])                # (B, N)
        ph = np.stack([p.basis.phase for p in layers])
        stats = [p.basis.stats() for p in layers]
        mu_ = np.stack([s[0] for s in stats])
        sg = np.stack([s[1] for s in stats])
        x = rng.normal(size=(B, n_inputs, d))
        arg = om[:, None, :, None] * x[:, :, None, :] + ph[:, None, :, None]   # (B, S, N, d)
        basis = (np.sin(arg) - mu_[:, None, :, None]) / (sg[:, None, :, None] + layers[0].basis.eps)
        inner = lam[:, None] @ np.swapaxes(basis, -1, -2)            # (B, S, m, N)
        y = np.sum(inner * beta[:, None], axis=-1)                    # (B, S, m)
        s1 += y.sum(axis=(0, 1))
        s2 += (y * y).sum(axis=(0, 1))
        done += B
    n = n_inits * n_inputs
    mean = s1 / n
    return mean, s2 / n - mean ** 2


def depth_variances(m=64, N=8, L=8, n_inits=20, n_inputs=500, seed=0):
    """Pooled activation variance after each of ``L`` stacked ActLayers."""
    rng = make_rng(seed, 12)
    acc = np.zeros(L)
    for _ in range(n_inits):
        h = rng.normal(size=(n_inputs, m))
        for k in range(L):
            h = actlayer_forward(init_actlayer(rng, m, m, N), h)
            acc[k] += np.mean(h * h)
    return acc / n_inits


def init_stats_suite(n_inits=10_000, n_inputs=10, configs=((2, 64, 8), (64, 64, 8), (64, 256, 4)),
                     depth_inits=100, seed=0):
    out = []
    for d, m, N in configs:
        mean, var = layer_output_moments(d, m, N, n_inits, n_inputs, seed)
        am, av = float(np.max(np.abs(mean))), float(np.max(np.abs(var - 1.0)))
        out.append(CheckResult(
            f"init-stats d={d} m={m} N={N}", am < 0.02 and av < 0.08,
            f"max|mean|={am:.4f} (<0.02) max|var-1|={av:.4f} (<0.08) over {n_inits * n_inputs} draws"))
    v = depth_variances(n_inits=depth_inits, seed=seed)
    ok = bool(np.all((v >= 0.7) & (v <= 1.4)))
    out.append(CheckResult("init-stats depth-8 stack (m=64, N=8)", ok,
                           "layer variances " + " ".join(f"{x:.3f}" for x in v) + " (in [0.7, 1.4])"))
    return out


# --------------------------------------------------------------------------
# derivative engines vs finite differences

def _random_layer(rng, d, m, N):
    p = init_actlayer(rng, d, m, N)
    p.basis = SinBasis(p.basis.omega, rng.normal(size=N), trainable=False)
    p.bias = rng.normal(size=m)
    return p


def jacobian_fd_error(n_configs=100, seed=0, h=1e-5):
    rng = make_rng(seed, 21)
    worst = 0.0
    for _ in range(n_configs):
        d, m, N = (int(v) for v in rng.integers(1, 9, size=3))
        p = _random_layer(rng, d, m, N)
        x = rng.normal(size=d)
        Jm = actlayer_jacobian(p, x)
        fd = np.empty_like(Jm)
        for l in range(d):
            e = np.zeros(d)
            e[l] = h
            fd[:, l] = (actlayer_forward(p, x + e) - actlayer_forward(p, x - e)) / (2 * h)
        worst = max(worst, rel_err(Jm, fd))
    return worst


def jet_jacobian_error(n_configs=100, seed=0):
    """Order-1 jets through the layer vs the closed-form Jacobian."""
    rng = make_rng(seed, 22)
    worst = 0.0
    for _ in range(n_configs):
        d, m, N = (int(v) for v in rng.integers(1, 9, size=3))
        p = _random_layer(rng, d, m, N)
        x = rng.normal(size=d)
        out = actlayer_forward(p, J.seed(x, range(d), 1))
        worst = max(worst, float(np.max(np.abs(out.taylor[1].T - actlayer_jacobian(p, x)))))
    return worst


def _fd_derivative(f, x, coord, k, h):
    """Central difference of order ``k`` along ``coord``."""
    stencils = {
        1: ([-1, 1], [-0.5, 0.5]),
        2: ([-1, 0, 1], [1.0, -2.0, 1.0]),
        3: ([-2, -1, 1, 2], [-0.5, 1.0, -1.0, 0.5]),
        4: ([-3, -2, -1, 0, 1, 2, 3], [-1 / 6, 2.0, -13 / 2, 28 / 3, -13 / 2, 2.0, -1 / 6]),
    }
    offs, wts = stencils[k]
    acc = 0.0
    for o, w in zip(offs, wts):
        e = np.array(x, dtype=np.float64)
        e[..., coord] += o * h
        acc = acc + w * f(e)
    return acc / h ** k


def jet_fd_errors(n_trials=20, seed=0):
    """Worst relative errors of order-2 (h=1e-3) and order-4 (h=1e-2) jets vs finite differences."""
    rng = make_rng(seed, 23)
    e2 = e4 = 0.0
    for _ in range(n_trials):
        model = build_model("actnet", {"d_in": 2, "d_out": 1, "m": 8, "N": 4, "L": 2})
        theta = model.init(rng)
        x = rng.uniform(-1, 1, size=2)
        coord = int(rng.integers(0, 2))
        f = lambda z: model.apply(theta, z)[..., 0]
        jet = directional_jet(model, theta, x, coord, 4)
        e2 = max(e2, rel_err(jet.deriv(2), _fd_derivative(f, x, coord, 2, 1e-3)))
        e4 = max(e4, rel_err(jet.deriv(4), _fd_derivative(f, x, coord, 4, 1e-2)))
    return e2, e4


def supervised_grad_error(seed=0, h=1e-6):
    """Exhaustive central differences over every parameter of a tiny net (MSE loss)."""
    rng = make_rng(seed, 24)
    model = build_model("actnet", {"d_in": 2, "d_out": 1, "m": 4, "N": 3, "L": 2})
    theta = model.init(rng)
    theta = theta + 0.1 * rng.normal(size=theta.size)
    X = rng.uniform(-1, 1, size=(16, 2))
    y = np.sin(X[:, 0]) * X[:, 1]

    def loss(th, X):
        r = model.apply(th, X)[..., 0] - y
        return (r * r).mean()

    _, g = loss_grad(loss, theta, X)
    fd = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        fd[i] = (loss(theta + e, X) - loss(theta - e, X)) / (2 * h)
    return rel_err(g, fd), model.n_params


def residual_grad_error(seed=0, n_params=50, h=1e-6, problem=None):
    """Spot-check central differences of a PDE residual loss on ``n_params`` random parameters."""
    rng = make_rng(seed, 25)
    problem = problem or poisson_problem(1)
    model = build_model("actnet", {"d_in": problem.input_dim, "d_out": 1, "m": 6, "N": 3, "L": 2})
    theta = model.init(rng)
    X = problem.sample(rng, 32)
    loss = lambda th, X: residual_loss(problem, model, th, X)
    _, g = loss_grad(loss, theta, X)
    idx = rng.choice(theta.size, size=min(n_params, theta.size), replace=False)
    fd = np.empty(idx.size)
    for k, i in enumerate(idx):
        e = np.zeros_like(theta)
        e[i] = h
        fd[k] = (loss(theta + e, X) - loss(theta - e, X)) / (2 * h)
    return rel_err(g[idx], fd)


def grad_suite(n_configs=100, seed=0):
    out = []
    ej = jacobian_fd_error(n_configs, seed)
    out.append(CheckResult("grad jacobian vs FD", ej < 1e-5, f"max rel err {ej:.2e} (<1e-5) over {n_configs} configs"))
    eq = jet_jacobian_error(n_configs, seed)
    out.append(CheckResult("grad jet order 1 vs closed-form jacobian", eq < 1e-12, f"max abs diff {eq:.2e} (<1e-12)"))
    e2, e4 = jet_fd_errors(seed=seed)
    out.append(CheckResult("grad jet order 2 vs FD", e2 < 1e-4, f"max rel err {e2:.2e} (<1e-4)"))
    out.append(CheckResult("grad jet order 4 vs FD", e4 < 1e-2, f"max rel err {e4:.2e} (<1e-2)"))
    es, n = supervised_grad_error(seed)
    out.append(CheckResult("grad supervised loss vs FD", es < 1e-5, f"max rel err {es:.2e} (<1e-5) over all {n} params"))
    er = residual_grad_error(seed)
    out.append(CheckResult("grad poisson residual loss vs FD", er < 1e-4, f"max rel err {er:.2e} (<1e-4) over 50 params"))
    return out


# --------------------------------------------------------------------------
# closed-form basis moments

def gauss_hermite_moments(omega, phase, nodes=64):
    """``(mean, std)`` of ``sin(omega X + phase)``, ``X ~ N(0, 1)``, by quadrature."""
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / np.sqrt(2 * np.pi)
    y = np.sin(np.multiply.outer(np.atleast_1d(omega), x) + np.atleast_1d(phase)[:, None])
    m1 = y @ w
    c = y - m1[:, None]
    return m1, np.sqrt((c * c) @ w)


def monte_carlo_deviation(omegas, phases, n_samples=10_000_000, seed=0, chunk=2_000_000):
    """Largest |closed form - sample estimate| in units of the estimate's standard error.

    One shared sample of ``X`` serves every pair. Standard errors: ``s / sqrt(n)``
    for the mean and ``sqrt((m4 - s^4) / n) / (2 s)`` for the standard deviation.
    """
    rng = make_rng(seed, 31)
    X = rng.normal(size=n_samples)
    worst_mu = worst_sigma = 0.0
    for om, ph in zip(omegas, phases):
        s1 = s2 = 0.0
        for i in range(0, n_samples, chunk):
            y = np.sin(om * X[i:i + chunk] + ph)
            s1 += y.sum()
            s2 += (y * y).sum()
        mean = s1 / n_samples
        var = s2 / n_samples - mean ** 2
        s = np.sqrt(var)
        m4 = 0.0
        for i in range(0, n_samples, chunk):
            c = np.sin(om * X[i:i + chunk] + ph) - mean
            c *= c
            m4 += (c * c).sum()
        m4 /= n_samples
        se_mu = s / np.sqrt(n_samples)
        se_sigma = np.sqrt(max(m4 - var ** 2, 0.0) / n_samples) / (2 * s) if s > 0 else 0.0
        d_mu = abs(float(mu(om, ph)) - mean)
        d_sg = abs(float(sigma(om, ph)) - s)
        worst_mu = max(worst_mu, d_mu / se_mu if se_mu > 0 else (0.0 if d_mu < 1e-12 else np.inf))
        worst_sigma = max(worst_sigma, d_sg / se_sigma if se_sigma > 0 else (0.0 if d_sg < 1e-12 else np.inf))
    return worst_mu, worst_sigma


def quadrature_grid_errors(n=41):
    """Closed forms vs Gauss-Hermite on a grid over ``|omega| <= 5``, ``|p| <= pi``.

    Returns ``(mu error, sigma error with 64 nodes for |omega| <= 4.9,
    sigma error with 128 nodes on the whole grid)``. Beyond ``|omega| = 4.9``
    the 64-node rule itself is off by more than 1e-10 for the second moment,
    whose integrand oscillates at ``2 omega``.
    """
    O, P = (a.ravel() for a in np.meshgrid(np.linspace(-5, 5, n), np.linspace(-np.pi, np.pi, n)))
    gm, gs = gauss_hermite_moments(O, P, 64)
    em = float(np.max(np.abs(mu(O, P) - gm)))
    inner = np.abs(O) <= 4.9
    es64 = float(np.max(np.abs(sigma(O, P) - gs)[inner]))
    es128 = float(np.max(np.abs(sigma(O, P) - gauss_hermite_moments(O, P, 128)[1])))
    return em, es64, es128


def oracle_suite(n_pairs=50, n_samples=10_000_000, seed=0):
    """Pairs are drawn from the initialization law: omega ~ N(0, 1), p ~ U(-pi, pi)."""
    rng = make_rng(seed, 32)
    om = rng.normal(size=n_pairs)
    ph = rng.uniform(-np.pi, np.pi, size=n_pairs)
    zm, zs = monte_carlo_deviation(om, ph, n_samples, seed)
    gm, gs = gauss_hermite_moments(om, ph, 64)
    dm = float(np.max(np.abs(mu(om, ph) - gm)))
    ds = float(np.max(np.abs(sigma(om, ph) - gs)))
    em, es64, es128 = quadrature_grid_errors()
    return [
        CheckResult("oracle mu vs Monte Carlo", zm < 4,
                    f"max |delta|/SE = {zm:.2f} (<4) over {n_pairs} pairs, {n_samples} samples"),
        CheckResult("oracle sigma vs Monte Carlo", zs < 4, f"max |delta|/SE = {zs:.2f} (<4)"),
        CheckResult("oracle mu vs Gauss-Hermite", dm < 1e-10, f"max abs diff {dm:.2e} (<1e-10), 64 nodes"),
        CheckResult("oracle sigma vs Gauss-Hermite", ds < 1e-10, f"max abs diff {ds:.2e} (<1e-10), 64 nodes"),
        CheckResult("oracle grid |omega|<=5", em < 1e-10 and es64 < 1e-10 and es128 < 1e-10,
                    f"mu {em:.2e}, sigma {es64:.2e} (64 nodes, |omega|<=4.9), {es128:.2e} (128 nodes)"),
    ]


SUITES = {"init-stats": init_stats_suite, "grad": grad_suite, "oracle": oracle_suite}
