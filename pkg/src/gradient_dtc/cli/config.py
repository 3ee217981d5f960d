"""Experiment configuration: parsing, validation and round-tripping.

Configs are YAML documents (JSON is accepted too, being a YAML subset).
Unknown keys are rejected so that a misspelt physics parameter cannot be
silently replaced by its default.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

EXPERIMENTS = (
    "phase_diagram", "trajectory", "reversal_time", "mutual_info", "qfi",
    "heating", "entropy", "participation", "sw_checks",
)
DRIVE_KINDS = ("delta", "edsr", "square", "none")

# which drives each experiment accepts
ALLOWED_DRIVES = {
    "phase_diagram": ("delta", "edsr"),
    "trajectory": DRIVE_KINDS,
    "reversal_time": ("delta",),
    "mutual_info": ("delta",),
    "qfi": ("none",),
    "heating": ("square",),
    "entropy": ("none",),
    "participation": ("none",),
    "sw_checks": ("none",),
}


class ConfigError(ValueError):
    """The configuration is malformed or inconsistent."""


class _Loader(yaml.SafeLoader):
    pass


# YAML 1.1 needs a dot in floats; accept plain scientific notation such as 1e3
_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(
        r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
        |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
        |\.[0-9_]+(?:[eE][-+][0-9]+)?
        |[-+]?\.(?:inf|Inf|INF)
        |\.(?:nan|NaN|NAN))$""",
        re.X,
    ),
    list("-+0123456789."),
)


@dataclass(frozen=True)
class ModelConfig:
    L: int = 6
    J_mhz: float = 0.0
    B0_mhz: float = 0.0
    g_mhz: float = 0.0
    disorder: str = "gaussian"
    disorder_width_mhz: float = 0.0
    gradient_axis: str = "z"


@dataclass(frozen=True)
class DriveConfig:
    kind: str = "none"
    epsilon_rad: float = 0.0
    T_ns: float = 100.0
    eta: float = 0.1
    A_mhz: float = 0.0
    steps_per_cycle: Optional[float] = None


@dataclass(frozen=True)
class GridAxis:
    name: str
    min: Optional[float] = None
    max: Optional[float] = None
    points: int = 1
    spacing: str = "linear"
    values: Optional[tuple] = None

    def coordinates(self) -> list:
        if self.values is not None:
            return list(self.values)
        if self.points == 1:
            return [self.min]
        if self.spacing == "log":
            pts = np.geomspace(self.min, self.max, self.points)
        else:
            pts = np.linspace(self.min, self.max, self.points)
        return [float(p) for p in pts]


@dataclass(frozen=True)
class RunConfig:
    realizations: int = 1
    master_seed: int = 0
    initial_state: str = "neel"
    n_periods: int = 400
    s_max: int = 200
    sample_every: int = 2
    sites: tuple = (1,)
    max_periods: int = 200000
    window_jt: tuple = (1e3, 1e4)
    window_samples: int = 24
    entropy_mode: str = "evolved"
    checkpoints: tuple = ()
    late_fraction: float = 0.125


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "results"
    format: str = "csv"
    figure_id: str = "custom"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    model: ModelConfig = field(default_factory=ModelConfig)
    drive: DriveConfig = field(default_factory=DriveConfig)
    grid: tuple = ()
    run: RunConfig = field(default_factory=RunConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    description: str = ""

    def axis_names(self) -> list[str]:
        return [a.name for a in self.grid]

    def grid_points(self) -> list[dict]:
        """Cartesian product of the axes, last axis fastest."""
        points = [{}]
        for axis in self.grid:
            points = [dict(p, **{axis.name: c}) for p in points for c in axis.coordinates()]
        return points


GRID_NAMES = {f.name for f in fields(ModelConfig)} | {
    f.name for f in fields(DriveConfig) if f.name not in ("kind", "steps_per_cycle")
}


def _build(cls, data: Any, where: str):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a mapping")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    kwargs = {}
    for k, v in data.items():
        if isinstance(v, list):
            v = tuple(v)
        kwargs[k] = v
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _number(v, name, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name} must be a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(f"{name} must be an integer, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{name} must be finite")


def validate(cfg: ExperimentConfig) -> None:
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
    m, d, r = cfg.model, cfg.drive, cfg.run
    _number(m.L, "model.L", integer=True)
    for name in ("J_mhz", "B0_mhz", "g_mhz", "disorder_width_mhz"):
        _number(getattr(m, name), f"model.{name}")
    for name in ("epsilon_rad", "T_ns", "eta", "A_mhz"):
        _number(getattr(d, name), f"drive.{name}")
    if m.disorder not in ("gaussian", "uniform"):
        raise ConfigError("model.disorder must be 'gaussian' or 'uniform'")
    if m.gradient_axis not in ("z", "y"):
        raise ConfigError("model.gradient_axis must be 'z' or 'y'")
    if d.kind not in DRIVE_KINDS:
        raise ConfigError(f"drive.kind must be one of {DRIVE_KINDS}")
    if d.kind not in ALLOWED_DRIVES[cfg.experiment]:
        raise ConfigError(f"experiment {cfg.experiment!r} needs drive.kind in {ALLOWED_DRIVES[cfg.experiment]}")
    if d.T_ns <= 0:
        raise ConfigError("drive.T_ns must be positive")
    if d.kind in ("edsr", "square") and not 0 < d.eta < 1:
        raise ConfigError("drive.eta must lie in (0, 1)")
    if d.steps_per_cycle is not None and d.steps_per_cycle < 40:
        raise ConfigError("drive.steps_per_cycle must be at least 40")
    for name in ("realizations", "n_periods", "s_max", "sample_every", "max_periods", "window_samples", "master_seed"):
        _number(getattr(r, name), f"run.{name}", integer=True)
    if r.realizations < 1:
        raise ConfigError("run.realizations must be >= 1")
    if r.sample_every < 1 or r.n_periods % r.sample_every:
        raise ConfigError("run.sample_every must be >= 1 and divide run.n_periods")
    if cfg.experiment == "phase_diagram" and r.s_max > r.n_periods // r.sample_every + 1:
        raise ConfigError("run.s_max exceeds the number of stroboscopic samples")
    if len(r.window_jt) != 2 or not 0 < r.window_jt[0] < r.window_jt[1]:
        raise ConfigError("run.window_jt must be [low, high] with 0 < low < high")
    if r.entropy_mode not in ("evolved", "eigen"):
        raise ConfigError("run.entropy_mode must be 'evolved' or 'eigen'")
    if any(c > r.n_periods or c < 1 for c in r.checkpoints):
        raise ConfigError("run.checkpoints must lie in [1, n_periods]")
    if not 0 < r.late_fraction <= 1:
        raise ConfigError("run.late_fraction must lie in (0, 1]")
    if cfg.output.format != "csv":
        raise ConfigError("output.format must be 'csv'")
    seen = set()
    for axis in cfg.grid:
        if axis.name not in GRID_NAMES:
            raise ConfigError(f"grid axis {axis.name!r} is not a model or drive parameter")
        if axis.name in seen:
            raise ConfigError(f"grid axis {axis.name!r} repeated")
        seen.add(axis.name)
        if axis.values is not None:
            if not axis.values:
                raise ConfigError(f"grid axis {axis.name!r} has an empty value list")
            for v in axis.values:
                _number(v, f"grid.{axis.name}", integer=axis.name == "L")
            continue
        if axis.min is None or axis.max is None:
            raise ConfigError(f"grid axis {axis.name!r} needs min and max (or values)")
        _number(axis.points, f"grid.{axis.name}.points", integer=True)
        if axis.points < 1:
            raise ConfigError(f"grid axis {axis.name!r} needs points >= 1")
        if axis.spacing not in ("linear", "log"):
            raise ConfigError("grid spacing must be 'linear' or 'log'")
        if axis.spacing == "log" and (axis.min <= 0 or axis.max <= 0):
            raise ConfigError("log spacing needs positive bounds")
        if axis.name == "L" and axis.points > 1:
            raise ConfigError("use an explicit value list for an L axis")
    _check_state(r.initial_state)
    Ls = next((a.coordinates() for a in cfg.grid if a.name == "L"), [m.L])
    for L in Ls:
        if not 1 <= L <= 14:
            raise ConfigError("L must lie in [1, 14]")
        if cfg.experiment != "trajectory" and L < 2:
            raise ConfigError("interacting experiments need L >= 2")
        for s in r.sites:
            if not 1 <= s <= L:
                raise ConfigError(f"run.sites entry {s} outside 1..{L}")
        if r.initial_state not in NAMED_STATES and len(r.initial_state) != L:
            raise ConfigError(f"initial state {r.initial_state!r} does not have L={L} sites")


NAMED_STATES = ("neel", "neel_y", "ground")


def _check_state(pattern) -> None:
    if not isinstance(pattern, str) or not pattern:
        raise ConfigError("run.initial_state must be a non-empty string")
    if pattern in NAMED_STATES:
        return
    from ..models import _ARROWS

    bad = sorted(set(pattern) - set(_ARROWS))
    if bad:
        raise ConfigError(f"run.initial_state has unknown spin symbols {bad}")


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping at the top level")
    allowed = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    if "experiment" not in data:
        raise ConfigError("missing 'experiment'")
    grid = data.get("grid") or []
    if isinstance(grid, dict):
        grid = [dict(v, name=k) for k, v in grid.items()]
    if not isinstance(grid, list):
        raise ConfigError("grid must be a list of axes")
    cfg = ExperimentConfig(
        experiment=data["experiment"],
        model=_build(ModelConfig, data.get("model"), "model"),
        drive=_build(DriveConfig, data.get("drive"), "drive"),
        grid=tuple(_build(GridAxis, a, "grid axis") for a in grid),
        run=_build(RunConfig, data.get("run"), "run"),
        output=_build(OutputConfig, data.get("output"), "output"),
        description=str(data.get("description", "")),
    )
    validate(cfg)
    return cfg


def config_to_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d["grid"] = [{k: v for k, v in a.items() if v is not None} for a in d["grid"]]
    return json.loads(json.dumps(d))


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return config_from_dict(data)


def config_hash(cfg: ExperimentConfig) -> str:
    blob = json.dumps(config_to_dict(cfg), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
