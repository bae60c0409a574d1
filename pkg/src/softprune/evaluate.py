"""Reconstruction quality metrics and the penalized pruning objective."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .data import ImageSet
from .errors import ConfigError, DimensionError
from .groups import GroupSet, identify_groups
from .nn import Autoencoder, forward, mse
from .pruning import (
    Criterion,
    PruningPlan,
    apply_plan,
    as_coefficients,
    exact_sparsity,
    rank_channels,
    removed_counts,
)

PSNR_CAP_DB = 100.0
_MSE_FLOOR = 1e-10


def psnr(originals, reconstructions, peak: float = 1.0) -> float:
    """Mean over images of 10*log10(peak^2 / mse_i), each capped at 100 dB."""
    a = np.asarray(originals, dtype=np.float64)
    b = np.asarray(reconstructions, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    a = a.reshape(a.shape[0], -1) if a.ndim > 1 else a[None, :]
    b = b.reshape(a.shape)
    per_image = np.mean((a - b) ** 2, axis=1)
    db = np.full(per_image.shape, PSNR_CAP_DB)
    ok = per_image >= _MSE_FLOOR
    db[ok] = np.minimum(10.0 * np.log10(peak * peak / per_image[ok]), PSNR_CAP_DB)
    return float(db.mean())


def evaluate(model: Autoencoder, evalset) -> tuple[float, float]:
    """(mse, psnr_db) from a single forward pass over ``evalset``."""
    x = evalset.images if isinstance(evalset, ImageSet) else np.asarray(evalset, dtype=np.float64)
    if len(x) == 0:
        raise DimensionError("evaluation set is empty")
    y = forward(model, x)
    return mse(x, y), psnr(x, y)


@dataclass(frozen=True)
class ObjectiveConfig:
    target_sparsity: float = 0.20
    tolerance: float = 0.01
    penalty_weight: float = 1000.0
    eval_count: int = 1024

    def __post_init__(self):
        rho, eps = self.target_sparsity, self.tolerance
        if not 0.0 < rho < 1.0:
            raise ConfigError(f"target_sparsity must be in (0, 1), got {rho}")
        if eps <= 0.0:
            raise ConfigError(f"tolerance must be positive, got {eps}")
        if self.penalty_weight < 0.0:
            raise ConfigError("penalty_weight must be non-negative")
        if self.eval_count < 1:
            raise ConfigError("eval_count must be >= 1")

    def feasible(self, sparsity: float) -> bool:
        return abs(sparsity - self.target_sparsity) <= self.tolerance + 1e-12


@dataclass
class EvalReport:
    mse: float
    psnr_db: float
    achieved_sparsity: float
    coefficients: tuple[float, ...]
    runtime_s: float = 0.0

    def to_dict(self, baseline_mse: float | None = None) -> dict:
        d = {
            "mse": self.mse,
            "psnr_db": self.psnr_db,
            "achieved_sparsity": self.achieved_sparsity,
            "coefficients": [round(float(x), 3) for x in self.coefficients],
            "coefficients_full": [float(x) for x in self.coefficients],
            "runtime_s": self.runtime_s,
        }
        if baseline_mse is not None:
            d["baseline_mse"] = baseline_mse
            d["delta_mse"] = self.mse - baseline_mse
        return d


@dataclass
class PruningContext:
    """Frozen baseline model, its groups, a ranking criterion and an evaluation set.

    Channel rankings are computed once. Evaluations are memoized on the
    discrete removal counts, since two coefficient vectors that round to the
    same counts produce the same pruned model. ``metric`` may be swapped for
    any ``(originals, reconstructions) -> score`` where higher is better.
    """

    model: Autoencoder
    evalset: ImageSet
    criterion: Criterion = field(default_factory=Criterion)
    groups: GroupSet | None = None
    metric: object = psnr

    def __post_init__(self):
        if self.groups is None:
            self.groups = identify_groups(self.model.arch)
        if self.model.widths != self.groups.arch.widths:
            raise ConfigError("pruning context needs the unpruned baseline model")
        self._order = [rank_channels(self.model, g, self.criterion) for g in self.groups]
        self._cache: dict[tuple[int, ...], tuple[float, float, float]] = {}
        self._lock = threading.Lock()
        self.calls = 0
        self.model_evaluations = 0
        self.baseline_mse, self.baseline_psnr = self._score(self.model)

    @property
    def m(self) -> int:
        return self.groups.m

    def _score(self, model):
        x = self.evalset.images
        y = forward(model, x)
        return mse(x, y), float(self.metric(x, y))

    def plan(self, c) -> PruningPlan:
        c = as_coefficients(c, self.m)
        k = removed_counts(c, self.groups.channel_counts)
        kept = tuple(np.sort(order[ki:]) for order, ki in zip(self._order, k))
        bounds = tuple(g.producer + 1 for g in self.groups)
        return PruningPlan(kept, tuple(int(x) for x in k), bounds)

    def prune(self, c) -> Autoencoder:
        return apply_plan(self.model, self.plan(c))

    def measure(self, c) -> tuple[float, float, float]:
        """(mse, score, exact sparsity) of the model pruned with ``c``."""
        plan = self.plan(c)
        key = plan.removed_counts
        with self._lock:
            self.calls += 1
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        pruned = apply_plan(self.model, plan)
        err, score = self._score(pruned)
        result = (err, score, exact_sparsity(plan, self.groups.arch))
        with self._lock:
            self.model_evaluations += 1
            self._cache[key] = result
        return result

    def report(self, c, runtime_s: float = 0.0) -> EvalReport:
        c = as_coefficients(c, self.m)
        err, score, sp = self.measure(c)
        return EvalReport(err, score, sp, tuple(float(x) for x in c), runtime_s)


def objective_from_measure(score: float, sparsity: float, cfg: ObjectiveConfig) -> float:
    return -score + cfg.penalty_weight * (sparsity - cfg.target_sparsity) ** 2


def objective(c, ctx: PruningContext, cfg: ObjectiveConfig) -> float:
    """J(c) = -psnr(pruned) + penalty_weight * (exact_sparsity - target)^2. Lower is better."""
    _, score, sp = ctx.measure(c)
    return objective_from_measure(score, sp, cfg)
