"""Parameter counts, FLOP estimates and forward timings over an (L, m, N) grid."""

from __future__ import annotations

import csv
import io
import itertools
import time

import numpy as np

from .core import make_rng
from .network import ActNet, ArchSpec, layout, param_count, flop_estimate

COMPLEXITY_HEADER = ("L", "m", "N", "params", "flatten_len", "flops", "ms_per_forward")
DEFAULT_GRID = {"L": (1, 2, 4), "m": (32, 64, 128), "N": (4, 8, 16)}


def grid_specs(Ls, ms, Ns, d_in=2, d_out=1):
    """One ``ArchSpec`` per point of the Cartesian grid, in ``L, m, N`` order."""
    return [ArchSpec(d_in=d_in, d_out=d_out, m=m, N=N, L=L) for L, m, N in itertools.product(Ls, ms, Ns)]


def time_forward(spec: ArchSpec, n_points: int = 1000, repeats: int = 3, seed: int = 0) -> float:
    """Best-of-``repeats`` wall time in ms of one batched forward pass over ``n_points`` inputs."""
    model = ActNet(spec)
    rng = make_rng(seed, 0)
    theta = model.init(rng)
    X = rng.uniform(-1.0, 1.0, size=(n_points, spec.d_in))
    model.apply(theta, X[:2])  # warm caches and compiled kernels
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        model.apply(theta, X)
        best = min(best, time.perf_counter() - t0)
    return best * 1e3


def complexity_rows(specs, n_points: int = 1000, timing: bool = True, repeats: int = 3):
    rows = []
    for spec in specs:
        flat = int(ActNet(spec).init(make_rng(0, 0)).size)
        rows.append({
            "L": spec.L,
            "m": spec.m,
            "N": spec.N,
            "params": param_count(spec),
            "flatten_len": flat,
            "flops": flop_estimate(spec),
            "ms_per_forward": time_forward(spec, n_points, repeats) if timing else None,
        })
    return rows


def layout_length(spec: ArchSpec) -> int:
    return sum(int(np.prod(shape)) for _, shape, _ in layout(spec))


def flop_doubling_ratios(rows):
    """``flops(2m) / flops(m)`` for every grid pair that differs only by a doubled m."""
    index = {(r["L"], r["m"], r["N"]): r["flops"] for r in rows}
    out = []
    for (L, m, N), f in sorted(index.items()):
        if (L, 2 * m, N) in index:
            out.append(((L, m, N), index[(L, 2 * m, N)] / f))
    return out


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPLEXITY_HEADER)
    for r in rows:
        ms = r["ms_per_forward"]
        w.writerow([r[k] for k in COMPLEXITY_HEADER[:-1]] + ["" if ms is None else f"{ms:.4f}"])
    return buf.getvalue()
