"""Run configuration: one YAML document with a section per subsystem."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError, DataIOError
from .evaluate import ObjectiveConfig
from .gd import GdConfig
from .grid import GridConfig
from .nn import ArchSpec, TrainConfig
from .pruning import Criterion


@dataclass(frozen=True)
class ArchSection:
    input_dim: int = 784
    hidden_dims: tuple[int, ...] = (512, 384)
    latent_dim: int = 256


@dataclass(frozen=True)
class TrainSection:
    learning_rate: float = 1e-3
    epochs: int = 30
    batch_size: int = 16
    precision: str = "float32"


@dataclass(frozen=True)
class GridSection:
    points_per_group: int = 10
    workers: int = 1


@dataclass(frozen=True)
class GdSection:
    step_size: float = 0.002
    momentum: float = 0.3
    fd_step: float = 0.05
    max_iters: int = 200
    converge_tol: float = 0.2
    converge_window: int = 2
    workers: int = 1


@dataclass(frozen=True)
class CriterionSection:
    kind: str = "norm_l2"


@dataclass(frozen=True)
class BaselineSection:
    probe_budget: int = 10_000
    image_count: int = 10


@dataclass(frozen=True)
class DataSection:
    train_images: str = "data/mnist/train-images-idx3-ubyte"
    test_images: str = "data/mnist/t10k-images-idx3-ubyte"
    synthetic: bool = False
    synthetic_train: int = 2048
    synthetic_test: int = 512


@dataclass(frozen=True)
class RunConfig:
    arch: ArchSection = field(default_factory=ArchSection)
    train: TrainSection = field(default_factory=TrainSection)
    objective: ObjectiveConfig = field(default_factory=ObjectiveConfig)
    grid: GridSection = field(default_factory=GridSection)
    gd: GdSection = field(default_factory=GdSection)
    criterion: CriterionSection = field(default_factory=CriterionSection)
    baselines: BaselineSection = field(default_factory=BaselineSection)
    data: DataSection = field(default_factory=DataSection)
    seed: int = 0
    out: str = "runs/default"

    # built objects

    def arch_spec(self) -> ArchSpec:
        return ArchSpec(self.arch.input_dim, tuple(self.arch.hidden_dims), self.arch.latent_dim)

    def train_config(self) -> TrainConfig:
        t = self.train
        return TrainConfig(t.learning_rate, t.epochs, t.batch_size, self.seed, t.precision)

    def grid_config(self) -> GridConfig:
        return GridConfig(self.grid.points_per_group, self.objective, self.grid.workers)

    def gd_config(self) -> GdConfig:
        g = self.gd
        return GdConfig(g.step_size, g.momentum, g.fd_step, g.max_iters, g.converge_tol,
                        g.converge_window, self.objective, g.workers)

    def criterion_obj(self) -> Criterion:
        return Criterion(self.criterion.kind, self.seed)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["arch"]["hidden_dims"] = list(d["arch"]["hidden_dims"])
        return d

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError(f"section {where or 'root'} must be a mapping")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where or 'root'}: {', '.join(unknown)}")
    kwargs = {}
    for name, value in data.items():
        default = getattr(cls(), name) if name in fields else None
        if dataclasses.is_dataclass(default):
            kwargs[name] = _build(type(default), value or {}, f"{where}.{name}".lstrip("."))
        elif isinstance(default, tuple):
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad value in {where or 'root'}: {exc}") from exc


def config_from_dict(data: dict | None) -> RunConfig:
    return _build(RunConfig, data or {}, "")


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataIOError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return config_from_dict(data)


def with_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """Apply CLI overrides; ``None`` values are ignored."""
    o = {k: v for k, v in overrides.items() if v is not None}
    objective = cfg.objective
    if "target_sparsity" in o or "tolerance" in o:
        objective = dataclasses.replace(
            objective,
            target_sparsity=o.get("target_sparsity", objective.target_sparsity),
            tolerance=o.get("tolerance", objective.tolerance),
        )
    grid = cfg.grid
    if "grid_points" in o:
        grid = dataclasses.replace(grid, points_per_group=o["grid_points"])
    criterion = cfg.criterion
    if "criterion" in o:
        criterion = CriterionSection(o["criterion"])
    return dataclasses.replace(
        cfg,
        objective=objective,
        grid=grid,
        criterion=criterion,
        seed=o.get("seed", cfg.seed),
        out=o.get("out", cfg.out),
    )
