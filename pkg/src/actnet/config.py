"""Run configuration files (TOML) with strict key checking.

A run file has the tables ``[problem]``, ``[model]``, ``[train]`` (with
optional ``[train.lr]`` and ``[train.causal]``), ``[output]`` and, for
windowed problems, ``[march]``. Unknown keys anywhere are rejected, and a
missing required key is reported by its dotted path. ``resolve`` returns the
fully expanded configuration, defaults included, which every run writes
next to its outputs as ``manifest.json``.
"""

from __future__ import annotations

import dataclasses
import inspect
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .models import FAMILIES
from .network import ArchSpec
from .pinn.losses import CausalSchedule
from .pinn.problems import PROBLEMS, make_problem
from .siren import SirenSpec
from .train import LrSchedule, TrainConfig


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


@dataclass
class OutputConfig:
    dir: str = "runs/default"
    metrics: str = "metrics.csv"
    checkpoint: str = "checkpoint.json"
    manifest: str = "manifest.json"


@dataclass
class MarchConfig:
    windows: int = 1
    t_end: float | None = None
    steps: list = field(default_factory=list)
    handoff_grid: int = 256


@dataclass
class RunConfig:
    problem: dict
    family: str
    model: dict
    train: TrainConfig
    output: OutputConfig
    march: MarchConfig | None = None

    def build_problem(self):
        params = {k: v for k, v in self.problem.items() if k != "name"}
        return make_problem(self.problem["name"], **params)

    def resolve(self) -> dict:
        """Plain dictionary of every setting, defaults included."""
        out = {
            "problem": dict(self.problem),
            "model": {"family": self.family, **self.model},
            "train": dataclasses.asdict(self.train),
            "output": dataclasses.asdict(self.output),
        }
        if self.march is not None:
            out["march"] = dataclasses.asdict(self.march)
        return out


def _check_keys(table: dict, allowed, required, where: str):
    if not isinstance(table, dict):
        raise ConfigError(f"{where or 'config'}: expected a table")
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(f"{where + '.' if where else ''}{unknown[0]}: unknown key")
    for name in required:
        if name not in table:
            raise ConfigError(f"{where + '.' if where else ''}{name}: missing required field")


def _dataclass_from(cls, table: dict, where: str, nested=None):
    nested = nested or {}
    fields = {f.name: f for f in dataclasses.fields(cls) if f.init}
    required = [n for n, f in fields.items()
                if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING]
    _check_keys(table, fields, required, where)
    kwargs = {}
    for k, v in table.items():
        kwargs[k] = nested[k](v, f"{where}.{k}") if k in nested else v
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from None


def _signature_keys(fn):
    params = inspect.signature(fn).parameters
    allowed = [n for n in params if n != "self"]
    required = [n for n, p in params.items() if n != "self" and p.default is inspect.Parameter.empty]
    return allowed, required


def _train(table, where):
    def lr(t, w):
        return _dataclass_from(LrSchedule, t, w)

    def causal(t, w):
        return _dataclass_from(CausalSchedule, t, w)

    table = dict(table)
    for key in ("agc_lambda", "agc_lambda_basis"):
        # TOML has no null: 0 or false switches clipping off
        if key in table and table[key] in (0, False):
            table[key] = None
    return _dataclass_from(TrainConfig, table, where, {"lr": lr, "causal": causal})


def parse_config(doc: dict) -> RunConfig:
    _check_keys(doc, ("problem", "model", "train", "output", "march"), ("problem", "model"), "")

    prob = doc["problem"]
    if not isinstance(prob, dict) or "name" not in prob:
        raise ConfigError("problem.name: missing required field")
    if prob["name"] not in PROBLEMS:
        raise ConfigError(f"problem.name: unknown problem {prob['name']!r}; expected one of {sorted(PROBLEMS)}")
    allowed, required = _signature_keys(PROBLEMS[prob["name"]].__init__)
    _check_keys({k: v for k, v in prob.items() if k != "name"}, allowed, required, "problem")

    model = dict(doc["model"])
    if "family" not in model:
        raise ConfigError("model.family: missing required field")
    family = model.pop("family")
    if family not in FAMILIES:
        raise ConfigError(f"model.family: unknown family {family!r}; expected one of {list(FAMILIES)}")
    spec_cls = ArchSpec if family == "actnet" else SirenSpec
    spec = _dataclass_from(spec_cls, model, "model")

    train = _train(doc.get("train", {}), "train")
    output = _dataclass_from(OutputConfig, doc.get("output", {}), "output")
    march = _dataclass_from(MarchConfig, doc["march"], "march") if "march" in doc else None
    cfg = RunConfig(dict(prob), family, spec.to_dict(), train, output, march)

    try:
        problem = cfg.build_problem()
    except (TypeError, ValueError) as e:
        raise ConfigError(f"problem: {e}") from None
    d_in = problem.input_dim
    if spec.d_in != d_in:
        raise ConfigError(f"model: network input size {spec.d_in} does not match problem {problem.name!r} "
                          f"which feeds {d_in} inputs")
    if spec.d_out != 1:
        raise ConfigError("model: PDE problems need a scalar network output (d_out = 1)")
    if march is not None:
        if not hasattr(problem, "window"):
            raise ConfigError(f"march: problem {problem.name!r} does not support time windows")
        if march.windows < 1:
            raise ConfigError("march.windows: must be >= 1")
        if march.steps and len(march.steps) != march.windows:
            raise ConfigError("march.steps: needs one entry per window")
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from None
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    return parse_config(doc)
