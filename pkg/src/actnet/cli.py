"""Command-line entry point: ``actnet {train,eval,check,complexity}``.

Exit codes: 0 success, 1 a property check failed, 2 configuration error,
3 numeric abort (non-finite loss or gradient). The environment variable
``ACTNET_NUM_THREADS`` caps the number of BLAS and kernel threads.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .checks import SUITES
from .complexity import DEFAULT_GRID, complexity_rows, grid_specs, rows_to_csv
from .config import ConfigError, load_config
from .models import build_model
from .pinn.marching import window_march
from .train import TrainingError, evaluate, load_checkpoint, save_checkpoint, train

EXIT_OK, EXIT_PROPERTY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
THREADS_ENV = "ACTNET_NUM_THREADS"


def _limit_threads():
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}: expected a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV}: expected a positive integer, got {raw!r}")
    # the compiled basis kernels are serial, so only BLAS pools need a cap
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def _write_manifest(out_dir: Path, name: str, doc: dict):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _apply_overrides(cfg, args):
    """Apply --seed, --steps and --out-dir; the training config is re-validated."""
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if getattr(args, "steps", None) is not None:
        changes["steps"] = args.steps
    if changes:
        try:
            cfg.train = dataclasses.replace(cfg.train, **changes)
        except ValueError as e:
            raise ConfigError(f"train: {e}") from None
    if args.out_dir is not None:
        cfg.output.dir = args.out_dir
    return cfg


def _manifest(cfg, command: str) -> dict:
    return {"command": command, "version": __version__, "config": cfg.resolve()}


def _fmt_metric(v):
    return "n/a" if v is None else f"{v:.6e}"


def _load(args):
    cfg = _apply_overrides(load_config(args.config), args)
    return cfg, Path(cfg.output.dir)


def cmd_train(args) -> int:
    cfg, out = _load(args)
    problem = cfg.build_problem()
    _write_manifest(out, cfg.output.manifest, _manifest(cfg, "train"))

    if cfg.march is None:
        model = build_model(cfg.family, cfg.model)
        try:
            res = train(model, problem, cfg.train)
        except TrainingError as e:
            if e.theta is not None:
                save_checkpoint(out / cfg.output.checkpoint, model, e.theta, cfg.train.seed, e.step)
            print(f"error: numeric abort at {e}", file=sys.stderr)
            return EXIT_NUMERIC
        res.metrics.to_csv(out / cfg.output.metrics)
        save_checkpoint(out / cfg.output.checkpoint, model, res.theta, cfg.train.seed, res.steps)
        print(f"final loss {_fmt_metric(res.final_loss)} rel_l2 {_fmt_metric(res.final_rel_l2)}")
        return EXIT_OK

    march = cfg.march
    stem, suffix = os.path.splitext(cfg.output.metrics)
    cstem, csuffix = os.path.splitext(cfg.output.checkpoint)

    def train_window(k, wp):
        tc = cfg.train
        if march.steps:
            tc = dataclasses.replace(tc, steps=int(march.steps[k]))
        model = build_model(cfg.family, cfg.model)
        res = train(model, wp, tc)
        res.metrics.to_csv(out / f"{stem}_w{k}{suffix}")
        save_checkpoint(out / f"{cstem}_w{k}{csuffix}", model, res.theta, tc.seed, res.steps)
        print(f"window {k} [{wp.t0:.4g}, {wp.t1:.4g}] loss {_fmt_metric(res.final_loss)} "
              f"rel_l2 {_fmt_metric(res.final_rel_l2)}")
        return model, res.theta, res

    try:
        results = window_march(problem, march.windows, train_window, march.t_end, march.handoff_grid)
    except TrainingError as e:
        print(f"error: numeric abort at {e}", file=sys.stderr)
        return EXIT_NUMERIC
    last = results[-1].result
    print(f"final loss {_fmt_metric(last.final_loss)} rel_l2 {_fmt_metric(last.final_rel_l2)}")
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg, out = _load(args)
    problem = cfg.build_problem()
    ckpt = Path(args.checkpoint) if args.checkpoint else out / cfg.output.checkpoint
    try:
        model, theta, doc = load_checkpoint(ckpt)
    except (OSError, ValueError) as e:
        raise ConfigError(f"checkpoint: {e}") from None
    if model.d_in != problem.input_dim:
        raise ConfigError(f"checkpoint: network input size {model.d_in} does not match problem {problem.name!r}")
    from .pinn.losses import residual_loss
    from .core import make_rng
    X = problem.sample(make_rng(cfg.train.seed, 2), cfg.train.batch_size)
    loss = float(residual_loss(problem, model, theta, X))
    rel = evaluate(problem, model, theta)
    if not np.isfinite(loss):
        print("error: non-finite residual loss", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"checkpoint {ckpt} step {doc['step']}: loss {_fmt_metric(loss)} rel_l2 {_fmt_metric(rel)}")
    return EXIT_OK


def cmd_check(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    failed = 0
    results = {}
    for name in names:
        for r in SUITES[name](seed=args.seed if args.seed is not None else 0):
            print(r.line(), flush=True)
            results[r.name] = {"passed": r.passed, "detail": r.detail}
            failed += not r.passed
    if args.out_dir is not None:
        _write_manifest(Path(args.out_dir), "manifest.json",
                        {"command": "check", "version": __version__, "suite": args.suite,
                         "seed": args.seed if args.seed is not None else 0, "results": results})
    return EXIT_PROPERTY if failed else EXIT_OK


def _int_list(text):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 0:
        raise argparse.ArgumentTypeError(f"expected non-negative integers, got {text!r}")
    return vals


def cmd_complexity(args) -> int:
    try:
        specs = grid_specs(args.L, args.m, args.N)
    except ValueError as e:
        raise ConfigError(f"grid: {e}") from None
    rows = complexity_rows(specs, n_points=args.points, timing=not args.no_timing)
    text = rows_to_csv(rows)
    sys.stdout.write(text)
    if args.out_dir is not None:
        out = Path(args.out_dir)
        _write_manifest(out, "manifest.json",
                        {"command": "complexity", "version": __version__,
                         "grid": {"L": args.L, "m": args.m, "N": args.N},
                         "points": args.points, "timing": not args.no_timing})
        (out / "complexity.csv").write_text(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="actnet", description="ActNet training, evaluation and property checks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="TOML run configuration")
        sp.add_argument("--seed", type=int, default=None, help="override train.seed")
        sp.add_argument("--out-dir", default=None, help="override output.dir")

    t = sub.add_parser("train", help="train a model from a run configuration")
    common(t)
    t.add_argument("--steps", type=int, default=None, help="override train.steps")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a saved checkpoint")
    common(e)
    e.add_argument("--checkpoint", default=None, help="checkpoint path (default: the config's output)")
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("check", help="run a property suite")
    c.add_argument("suite", choices=[*SUITES, "all"])
    common(c, config=False)
    c.set_defaults(func=cmd_check)

    x = sub.add_parser("complexity", help="parameter, FLOP and timing report over an (L, m, N) grid")
    x.add_argument("--L", type=_int_list, default=list(DEFAULT_GRID["L"]), help="comma-separated depths")
    x.add_argument("--m", type=_int_list, default=list(DEFAULT_GRID["m"]), help="comma-separated widths")
    x.add_argument("--N", type=_int_list, default=list(DEFAULT_GRID["N"]), help="comma-separated basis sizes")
    x.add_argument("--points", type=int, default=1000, help="batch size of the timed forward pass")
    x.add_argument("--no-timing", action="store_true", help="skip the timing column")
    x.add_argument("--out-dir", default=None, help="also write complexity.csv and manifest.json here")
    x.set_defaults(func=cmd_complexity)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else EXIT_OK
    try:
        limiter = _limit_threads()
        try:
            return args.func(args)
        finally:
            if limiter is not None:
                limiter.unregister()
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
