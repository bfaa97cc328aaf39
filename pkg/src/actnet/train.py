"""Adam with warmup/decay schedules, adaptive gradient clipping and the training loop."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .autodiff import loss_grad
from .core import make_rng
from .models import build_model
from .pinn.losses import CausalSchedule, model_field, relative_l2, residual_loss

METRICS_HEADER = ("step", "loss", "rel_l2", "lr", "ms_per_step")
EPS_W = 1e-3


class TrainingError(RuntimeError):
    """Non-finite loss or gradient; ``theta`` holds the last finite parameters."""

    def __init__(self, step: int, message: str, theta=None):
        super().__init__(f"step {step}: {message}")
        self.step = step
        self.theta = theta


@dataclass
class LrSchedule:
    warmup_start: float = 1e-7
    warmup_peak: float = 5e-3
    warmup_steps: int = 1000
    decay_rate: float = 0.75
    decay_every: int = 1000
    lr_floor: float = 0.0

    def __post_init__(self):
        if not (self.warmup_start > 0 and self.warmup_peak > 0 and self.decay_rate > 0):
            raise ValueError("learning rates and decay rate must be positive")
        if self.warmup_steps < 0 or self.decay_every < 1 or self.lr_floor < 0:
            raise ValueError("warmup_steps >= 0, decay_every >= 1 and lr_floor >= 0 are required")


def lr_at(schedule: LrSchedule, step: int) -> float:
    """Linear warmup, then ``peak * rate ** floor((step - warmup) / every)``, never below the floor."""
    s = schedule
    if step < s.warmup_steps:
        return s.warmup_start + (s.warmup_peak - s.warmup_start) * step / s.warmup_steps
    k = (step - s.warmup_steps) // s.decay_every
    return max(s.warmup_peak * s.decay_rate ** k, s.lr_floor)


@dataclass
class TrainConfig:
    steps: int = 20_000
    batch_size: int = 1024
    lr: LrSchedule = field(default_factory=LrSchedule)
    agc_lambda: float | None = 0.01
    agc_lambda_basis: float | None = 0.01
    adam_b1: float = 0.9
    adam_b2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    causal: CausalSchedule | None = None
    eval_every: int = 1000
    record_timing: bool = True

    def __post_init__(self):
        if self.steps < 0 or self.batch_size < 1 or self.eval_every < 1:
            raise ValueError("steps >= 0, batch_size >= 1 and eval_every >= 1 are required")
        if self.lr.warmup_steps > max(self.steps, 1) and self.steps > 0:
            raise ValueError("warmup_steps must not exceed steps")
        for name in ("agc_lambda", "agc_lambda_basis"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive or unset")

    def to_dict(self):
        return asdict(self)


# optimizer ----------------------------------------------------------------

@dataclass
class AdamState:
    params: np.ndarray
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def create(cls, params):
        params = np.array(params, dtype=np.float64)
        return cls(params, np.zeros_like(params), np.zeros_like(params), 0)


def adam_step(state: AdamState, grad, lr: float, b1=0.9, b2=0.999, eps=1e-8, frozen=None) -> AdamState:
    """One bias-corrected Adam update; positions in ``frozen`` do not move."""
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.params.shape:
        raise ValueError(f"gradient shape {grad.shape} does not match parameters {state.params.shape}")
    if not np.all(np.isfinite(grad)):
        raise TrainingError(state.t, "non-finite gradient", state.params)
    t = state.t + 1
    m = b1 * state.m + (1.0 - b1) * grad
    v = b2 * state.v + (1.0 - b2) * grad * grad
    mhat = m / (1.0 - b1 ** t)
    vhat = v / (1.0 - b2 ** t)
    update = lr * mhat / (np.sqrt(vhat) + eps)
    if frozen is not None:
        update[frozen] = 0.0
    return AdamState(state.params - update, m, v, t)


def agc_units(layout):
    """``(slice, rows, kind)`` per flat tensor; matrices are clipped per output row."""
    units, pos = [], 0
    for _, shape, kind in layout:
        size = int(np.prod(shape))
        rows = shape[0] if kind == "matrix" else 1
        units.append((slice(pos, pos + size), rows, kind))
        pos += size
    return units


def agc_clip(grads, params, layout, lam: float, lam_basis: float | None = None, eps_w: float = EPS_W):
    """Unit-wise adaptive gradient clipping.

    For each unit, if ``|g| / (|w| + eps_w) > lam`` the gradient is rescaled to
    ``g * lam * (|w| + eps_w) / |g|``. Basis units use ``lam_basis`` (no
    clipping when it is None).
    """
    out = np.array(grads, dtype=np.float64)
    params = np.asarray(params, dtype=np.float64)
    for sl, rows, kind in agc_units(layout):
        lim = lam_basis if kind == "basis" else lam
        if lim is None:
            continue
        g = out[sl].reshape(rows, -1)
        w = params[sl].reshape(rows, -1)
        gn = np.sqrt(np.sum(g * g, axis=1))
        bound = lim * (np.sqrt(np.sum(w * w, axis=1)) + eps_w)
        scale = np.where(gn > bound, bound / np.where(gn > 0, gn, 1.0), 1.0)
        out[sl] = (g * scale[:, None]).ravel()
    return out


# metrics --------------------------------------------------------------------

@dataclass
class RunMetrics:
    rows: list = field(default_factory=list)

    def add(self, step, loss, rel_l2, lr, ms):
        if self.rows and step <= self.rows[-1]["step"]:
            raise ValueError("metric rows must have increasing steps")
        self.rows.append({"step": int(step), "loss": loss, "rel_l2": rel_l2, "lr": lr, "ms_per_step": ms})

    @property
    def final(self) -> dict:
        return self.rows[-1] if self.rows else {}

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(METRICS_HEADER)
            for r in self.rows:
                w.writerow([_fmt(r[k]) for k in METRICS_HEADER])


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


# checkpoints ----------------------------------------------------------------

def save_checkpoint(path, model, theta, seed: int, step: int):
    """JSON object ``{family, spec, flat_params, seed, step}``."""
    doc = {
        "family": model.family,
        "spec": model.spec.to_dict(),
        "flat_params": [float(x) for x in np.asarray(theta)],
        "seed": int(seed),
        "step": int(step),
    }
    Path(path).write_text(json.dumps(doc))


def load_checkpoint(path):
    """Returns ``(model, theta, doc)``."""
    doc = json.loads(Path(path).read_text())
    missing = [k for k in ("family", "spec", "flat_params", "seed", "step") if k not in doc]
    if missing:
        raise ValueError(f"checkpoint {path} lacks fields: {', '.join(missing)}")
    model = build_model(doc["family"], doc["spec"])
    theta = np.asarray(doc["flat_params"], dtype=np.float64)
    if theta.shape != (model.n_params,):
        raise ValueError(f"checkpoint has {theta.size} parameters, architecture needs {model.n_params}")
    return model, theta, doc


# training loop --------------------------------------------------------------

@dataclass
class TrainResult:
    theta: np.ndarray
    metrics: RunMetrics
    steps: int
    final_loss: float
    final_rel_l2: float | None
    stopped_early: bool = False


def evaluate(problem, model, theta):
    """Relative L2 error on the problem grid, or None without a closed form."""
    if not problem.has_exact:
        return None
    return relative_l2(problem, model_field(problem, model, theta))


def train(model, problem, config: TrainConfig, theta0=None, callback=None) -> TrainResult:
    """Run ``config.steps`` Adam steps on fresh uniform batches.

    Randomness comes from two streams of ``config.seed``: stream 0 initializes
    the parameters, stream 1 draws collocation batches. ``callback(step,
    theta)`` is called after each metrics row; returning True stops training.
    """
    init_rng = make_rng(config.seed, 0)
    batch_rng = make_rng(config.seed, 1)
    theta = model.init(init_rng) if theta0 is None else np.array(theta0, dtype=np.float64)
    state = AdamState.create(theta)
    frozen = model.frozen_mask()
    frozen = frozen if frozen.any() else None
    metrics = RunMetrics()
    n_bins = config.causal.n_bins if config.causal else 32

    def loss_at(step):
        eps = config.causal.epsilon_at(step) if config.causal else None
        return lambda th, X: residual_loss(problem, model, th, X, eps, n_bins)

    last_time = time.perf_counter()
    since = 0
    stopped = False
    for step in range(config.steps):
        lr = lr_at(config.lr, step)
        X = problem.sample(batch_rng, config.batch_size)
        loss, g = loss_grad(loss_at(step), state.params, X)
        if not math.isfinite(loss):
            raise TrainingError(step, "non-finite loss", state.params)
        if not np.all(np.isfinite(g)):
            raise TrainingError(step, "non-finite gradient", state.params)
        if config.agc_lambda is not None or config.agc_lambda_basis is not None:
            g = agc_clip(g, state.params, model.layout, config.agc_lambda, config.agc_lambda_basis)
        if step % config.eval_every == 0:
            now = time.perf_counter()
            ms = (now - last_time) * 1e3 / since if (config.record_timing and since) else None
            metrics.add(step, loss, evaluate(problem, model, state.params), lr, ms)
            if callback is not None and callback(step, state.params):
                stopped = True
                break
            last_time, since = time.perf_counter(), 0
        state = adam_step(state, g, lr, config.adam_b1, config.adam_b2, config.adam_eps, frozen)
        since += 1

    steps_done = state.t
    X = problem.sample(batch_rng, config.batch_size)
    final_loss = float(loss_at(steps_done)(state.params, X))
    final_rel = evaluate(problem, model, state.params)
    if not stopped:
        ms = None
        if config.record_timing and since:
            ms = (time.perf_counter() - last_time) * 1e3 / since
        if not metrics.rows or metrics.rows[-1]["step"] < steps_done:
            metrics.add(steps_done, final_loss, final_rel, lr_at(config.lr, steps_done), ms)
        if callback is not None:
            callback(steps_done, state.params)
    return TrainResult(state.params, metrics, steps_done, final_loss, final_rel, stopped)
